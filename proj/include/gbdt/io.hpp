#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gbdt/errors.hpp"
#include "gbdt/grid.hpp"
#include "gbdt/verify.hpp"
#include "gbdt/version.hpp"

namespace gbdt {

using Json = nlohmann::json;

/// Full-precision decimal formatting so exports round-trip bit-exactly.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Write-temp-then-rename so readers never observe partial files.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out.good()) throw Error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

/// CSV export: header `xi,eta,flag,entry_00_re,entry_00_im,...` with the
/// matrix entries in row-major order; one line per grid point, eta-major.
/// Flagged points keep their flag and write empty value cells.
inline std::string field_to_csv(const FieldGrid& field) {
    std::ostringstream out;
    out << "xi,eta,flag";
    for (std::size_t r = 0; r < field.m; ++r)
        for (std::size_t c = 0; c < field.cols(); ++c)
            out << ",entry_" << r << c << "_re,entry_" << r << c << "_im";
    out << "\n";
    const Grid& g = field.grid;
    for (std::size_t j = 0; j < g.neta; ++j)
        for (std::size_t i = 0; i < g.nxi; ++i) {
            const std::size_t idx = g.index(i, j);
            out << format_double(g.xi(i)) << "," << format_double(g.eta(j)) << ","
                << field.status[idx];
            if (field.ok(idx)) {
                const ComplexMatrix& v = field.values[idx];
                for (std::size_t r = 0; r < v.rows(); ++r)
                    for (std::size_t c = 0; c < v.cols(); ++c)
                        out << "," << format_double(v(r, c).real()) << ","
                            << format_double(v(r, c).imag());
            } else {
                for (std::size_t k = 0; k < 2 * field.m * field.cols(); ++k) out << ",";
            }
            out << "\n";
        }
    return out.str();
}

inline void write_field_csv(const std::filesystem::path& path, const FieldGrid& field) {
    atomic_write(path, field_to_csv(field));
}

/// Reads a field written by field_to_csv; the lattice is reconstructed from
/// the coordinate columns.
inline FieldGrid read_field_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::string header;
    if (!std::getline(in, header)) throw Error("empty field file " + path.string());

    std::size_t value_cols = 0;
    {
        std::stringstream hs(header);
        std::string tok;
        std::vector<std::string> cols;
        while (std::getline(hs, tok, ',')) cols.push_back(tok);
        if (cols.size() < 3 || cols[0] != "xi" || cols[1] != "eta" || cols[2] != "flag")
            throw Error("unrecognized field header in " + path.string());
        value_cols = cols.size() - 3;
        if (value_cols == 0 || value_cols % 2 != 0)
            throw Error("malformed value columns in " + path.string());
    }

    struct Row {
        double xi, eta;
        int flag;
        std::vector<double> values;  // may be empty for flagged points
    };
    std::vector<Row> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::string tok;
        Row row;
        std::getline(ls, tok, ',');
        row.xi = std::stod(tok);
        std::getline(ls, tok, ',');
        row.eta = std::stod(tok);
        std::getline(ls, tok, ',');
        row.flag = std::stoi(tok);
        while (std::getline(ls, tok, ','))
            if (!tok.empty()) row.values.push_back(std::stod(tok));
        if (!row.values.empty() && row.values.size() != value_cols)
            throw Error("inconsistent row width in " + path.string());
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error("no data rows in " + path.string());

    std::set<double> xis, etas;
    for (const auto& r : rows) {
        xis.insert(r.xi);
        etas.insert(r.eta);
    }
    Grid g;
    g.nxi = xis.size();
    g.neta = etas.size();
    g.xi0 = *xis.begin();
    g.eta0 = *etas.begin();
    g.dxi = g.nxi > 1 ? (*xis.rbegin() - g.xi0) / double(g.nxi - 1) : 1.0;
    g.deta = g.neta > 1 ? (*etas.rbegin() - g.eta0) / double(g.neta - 1) : 1.0;
    if (rows.size() != g.size())
        throw Error("field file is not a full lattice: " + path.string());

    // entry count: value_cols = 2 * m * cols. Square fields have cols == m;
    // the Hamiltonian export uses cols == 2m. Try square first.
    std::size_t m = 0, cols = 0;
    const std::size_t pairs = value_cols / 2;
    for (std::size_t cand = 1; cand * cand <= pairs; ++cand) {
        if (cand * cand == pairs) { m = cand; cols = cand; }
        if (2 * cand * cand == pairs) { m = cand; cols = 2 * cand; }
    }
    if (m == 0) throw Error("cannot infer matrix shape from " + path.string());

    FieldGrid field(g, m);
    field.cols_override = cols;
    for (const auto& r : rows) {
        const std::size_t i = std::size_t(std::llround((r.xi - g.xi0) / g.dxi));
        const std::size_t j = std::size_t(std::llround((r.eta - g.eta0) / g.deta));
        const std::size_t idx = g.index(i, j);
        field.status[idx] = r.flag;
        if (r.flag == int(PointStatus::Ok)) {
            if (r.values.empty()) throw Error("ok row without values in " + path.string());
            ComplexMatrix v(m, cols);
            std::size_t k = 0;
            for (std::size_t rr = 0; rr < m; ++rr)
                for (std::size_t cc = 0; cc < cols; ++cc) {
                    v(rr, cc) = Complex(r.values[k], r.values[k + 1]);
                    k += 2;
                }
            field.values[idx] = std::move(v);
        }
    }
    return field;
}

inline Json check_to_json(const CheckResult& c) {
    return Json{{"name", c.name},
                {"max_residual", c.max_residual},
                {"mean_residual", c.mean_residual},
                {"tolerance", c.tolerance},
                {"coverage", c.coverage},
                {"coverage_floor", c.coverage_floor},
                {"pass", c.pass}};
}

inline CheckResult check_from_json(const Json& j) {
    CheckResult c;
    c.name = j.at("name").get<std::string>();
    c.max_residual = j.at("max_residual").get<double>();
    c.mean_residual = j.at("mean_residual").get<double>();
    c.tolerance = j.at("tolerance").get<double>();
    c.coverage = j.at("coverage").get<double>();
    c.coverage_floor = j.at("coverage_floor").get<double>();
    c.pass = j.at("pass").get<bool>();
    return c;
}

inline Json report_to_json(const ResidualReport& r) {
    Json arr = Json::array();
    for (const auto& c : r.checks) arr.push_back(check_to_json(c));
    return Json{{"checks", arr}, {"pass", r.pass()}, {"max_residual", r.max_residual()}};
}

inline ResidualReport report_from_json(const Json& j) {
    ResidualReport r;
    for (const auto& c : j.at("checks")) r.checks.push_back(check_from_json(c));
    return r;
}

/// Sidecar: configuration echo, residual report, library version.
inline void write_sidecar(const std::filesystem::path& path, const Json& config_echo,
                          const ResidualReport& report, const Json& extra = Json::object()) {
    Json j{{"version", kVersion},
           {"config", config_echo},
           {"report", report_to_json(report)}};
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    atomic_write(path, j.dump(2) + "\n");
}

}  // namespace gbdt
