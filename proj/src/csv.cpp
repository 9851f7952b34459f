#include "twoscale/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <system_error>

namespace twoscale {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    if (res.ec != std::errc{}) throw Error("format_double: conversion failed");
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ConfigError("not a number: '" + std::string(text) + "'");
    }
    return v;
}

std::string csv_record(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) line += ',';
        const auto& f = fields[i];
        if (f.find_first_of(",\"\r\n") == std::string::npos) {
            line += f;
            continue;
        }
        line += '"';
        for (const char c : f) {
            if (c == '"') line += '"';
            line += c;
        }
        line += '"';
    }
    return line;
}

std::vector<std::string> parse_csv_record(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw ConfigError("csv: unterminated quoted field");
    fields.push_back(std::move(cur));
    return fields;
}

namespace {

std::string label(const std::string& prefix, const std::string& name, const std::string& unit) {
    return prefix + ":" + name + " [" + unit + "]";
}

std::string unit_of(const RunRecord& rec, const std::string& name) {
    for (std::size_t i = 0; i < rec.state_names.size(); ++i) {
        if (rec.state_names[i] == name && i < rec.state_units.size()) return rec.state_units[i];
    }
    return "";
}

struct Block {
    std::string prefix;
    const std::vector<std::string>* names;
    std::vector<std::string> units;
    const Trajectory* traj;
};

std::vector<Block> blocks(const RunRecord& rec) {
    std::vector<Block> out;
    out.push_back({"truth", &rec.state_names, rec.state_units, &rec.truth});
    out.push_back({"meas", &rec.output_names, rec.output_units, &rec.measurements});
    for (const auto& s : rec.schemes) {
        const std::string p(to_string(s.kind));
        out.push_back({p, &rec.state_names, rec.state_units, &s.estimate});
        if (!s.slow_estimate.empty()) out.push_back({p + ".slow", &rec.state_names, rec.state_units, &s.slow_estimate});
        if (!s.fast_estimate.empty()) {
            std::vector<std::string> units;
            for (const auto& n : rec.fast_state_names) units.push_back(unit_of(rec, n));
            out.push_back({p + ".fast", &rec.fast_state_names, units, &s.fast_estimate});
        }
    }
    return out;
}

// "prefix:name [unit]" -> parts
void split_label(const std::string& text, std::string& prefix, std::string& name, std::string& unit) {
    const auto colon = text.find(':');
    const auto open = text.rfind(" [");
    if (colon == std::string::npos || open == std::string::npos || open < colon || text.back() != ']') {
        throw ConfigError("csv: malformed column label '" + text + "'");
    }
    prefix = text.substr(0, colon);
    name = text.substr(colon + 1, open - colon - 1);
    unit = text.substr(open + 2, text.size() - open - 3);
}

}  // namespace

void write_csv(const RunRecord& rec, std::ostream& out) {
    const auto bs = blocks(rec);
    std::vector<std::string> header{"time [s]"};
    for (const auto& b : bs) {
        for (std::size_t i = 0; i < b.names->size(); ++i) header.push_back(label(b.prefix, (*b.names)[i], b.units[i]));
    }
    out << csv_record(header) << "\r\n";

    const std::size_t rows = rec.truth.size();
    for (const auto& b : bs) {
        if (b.traj->size() != rows) throw DimensionError("export_csv: series '" + b.prefix + "' has a different length");
        if (b.traj->dim() != static_cast<Eigen::Index>(b.names->size()) && rows > 0) {
            throw DimensionError("export_csv: series '" + b.prefix + "' does not match its column names");
        }
    }
    std::vector<std::string> row;
    for (std::size_t j = 0; j < rows; ++j) {
        row.clear();
        row.push_back(format_double(rec.truth.times[j]));
        for (const auto& b : bs) {
            if (b.traj->times[j] != rec.truth.times[j]) {
                throw DimensionError("export_csv: series '" + b.prefix + "' is not on the truth grid");
            }
            const Vector& x = b.traj->states[j];
            for (Eigen::Index i = 0; i < x.size(); ++i) row.push_back(format_double(x(i)));
        }
        out << csv_record(row) << "\r\n";
    }
}

void export_csv(const RunRecord& rec, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("export_csv: cannot open '" + path.string() + "' for writing");
    write_csv(rec, out);
    out.flush();
    if (!out) throw Error("export_csv: write to '" + path.string() + "' failed");
}

RunRecord read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("csv: missing header row");
    const auto header = parse_csv_record(line);
    if (header.empty() || header[0] != "time [s]") throw ConfigError("csv: first column must be 'time [s]'");

    RunRecord rec;
    std::vector<std::string> series_prefix;
    std::vector<std::vector<std::string>> series_names, series_units;
    std::vector<std::size_t> column_series;
    for (std::size_t c = 1; c < header.size(); ++c) {
        std::string prefix, name, unit;
        split_label(header[c], prefix, name, unit);
        if (series_prefix.empty() || series_prefix.back() != prefix) {
            series_prefix.push_back(prefix);
            series_names.emplace_back();
            series_units.emplace_back();
        }
        series_names.back().push_back(name);
        series_units.back().push_back(unit);
        column_series.push_back(series_prefix.size() - 1);
    }

    std::vector<Trajectory*> series(series_prefix.size(), nullptr);
    rec.schemes.reserve(series_prefix.size());
    for (std::size_t s = 0; s < series_prefix.size(); ++s) {
        const auto& p = series_prefix[s];
        if (p == "truth") {
            rec.state_names = series_names[s];
            rec.state_units = series_units[s];
            series[s] = &rec.truth;
        } else if (p == "meas") {
            rec.output_names = series_names[s];
            rec.output_units = series_units[s];
            series[s] = &rec.measurements;
        } else {
            const auto dot = p.find('.');
            const SchemeKind kind = parse_scheme(p.substr(0, dot));
            if (rec.schemes.empty() || rec.schemes.back().kind != kind) {
                rec.schemes.emplace_back();
                rec.schemes.back().kind = kind;
            }
            auto& sr = rec.schemes.back();
            if (dot == std::string::npos) {
                series[s] = &sr.estimate;
            } else if (p.substr(dot + 1) == "slow") {
                series[s] = &sr.slow_estimate;
            } else if (p.substr(dot + 1) == "fast") {
                rec.fast_state_names = series_names[s];
                series[s] = &sr.fast_estimate;
            } else {
                throw ConfigError("csv: unknown series '" + p + "'");
            }
        }
    }
    if (!std::all_of(series.begin(), series.end(), [](auto* p) { return p != nullptr; })) {
        throw ConfigError("csv: unresolved column");
    }

    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto fields = parse_csv_record(line);
        if (fields.size() != header.size()) throw ConfigError("csv: row has " + std::to_string(fields.size()) +
                                                              " fields, header has " + std::to_string(header.size()));
        const double t = parse_double(fields[0]);
        std::vector<Vector> values(series.size());
        for (std::size_t s = 0; s < series.size(); ++s) {
            values[s].resize(static_cast<Eigen::Index>(series_names[s].size()));
        }
        std::vector<Eigen::Index> fill(series.size(), 0);
        for (std::size_t c = 1; c < fields.size(); ++c) {
            const std::size_t s = column_series[c - 1];
            values[s](fill[s]++) = parse_double(fields[c]);
        }
        for (std::size_t s = 0; s < series.size(); ++s) series[s]->push_back(t, std::move(values[s]));
    }
    return rec;
}

RunRecord import_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("import_csv: cannot open '" + path.string() + "'");
    return read_csv(in);
}

}  // namespace twoscale
