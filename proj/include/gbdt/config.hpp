#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gbdt/background.hpp"
#include "gbdt/ernst.hpp"
#include "gbdt/errors.hpp"
#include "gbdt/grid.hpp"
#include "gbdt/jordan.hpp"
#include "gbdt/sigma.hpp"
#include "gbdt/triple.hpp"

namespace gbdt {

using Json = nlohmann::json;

enum class RunMode { Sigma, Grav, Ernst, Verify, SqrtDemo };

inline std::string mode_name(RunMode m) {
    switch (m) {
        case RunMode::Sigma: return "sigma";
        case RunMode::Grav: return "grav";
        case RunMode::Ernst: return "ernst";
        case RunMode::Verify: return "verify";
        case RunMode::SqrtDemo: return "sqrt-demo";
    }
    return "?";
}

/// Parsed and validated run configuration. Parsing collects every violation
/// before failing so users see all mistakes at once. Complex numbers are
/// written as [re, im]; matrices as row lists of such pairs.
struct RunConfig {
    RunMode mode = RunMode::Sigma;
    Json echo;  // the document as given, echoed into the sidecar

    // sigma/grav/ernst/sqrt-demo
    std::optional<Triple> triple;
    std::optional<Background> background;
    std::optional<Grid> grid;
    SigmaAssembly assembly = SigmaAssembly::OdePropagation;
    Anchor anchor = Anchor::ExplicitField;
    BranchChoice branch = BranchChoice::principal();
    double path_step = 1e-3;

    // ernst
    std::optional<HamiltonianPair> hamiltonians;
    int z_samples = 8;

    // verify
    std::string verify_field, verify_sidecar;

    // outputs (file names inside the output directory)
    std::string field_file = "field.csv";
    std::string sidecar_file = "report.json";
};

namespace detail_config {

inline Complex parse_complex(const Json& j, std::vector<std::string>& issues,
                             const std::string& where) {
    if (j.is_number()) return Complex(j.get<double>(), 0.0);
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return Complex(j[0].get<double>(), j[1].get<double>());
    issues.push_back(where + ": expected a number or [re, im] pair");
    return Complex(0, 0);
}

inline ComplexMatrix parse_matrix(const Json& j, std::vector<std::string>& issues,
                                  const std::string& where) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) {
        issues.push_back(where + ": expected a matrix (list of rows)");
        return ComplexMatrix();
    }
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].size();
    ComplexMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) {
            issues.push_back(where + ": ragged matrix rows");
            return ComplexMatrix();
        }
        for (std::size_t c = 0; c < cols; ++c)
            m(r, c) = parse_complex(j[r][c], issues,
                                    where + "[" + std::to_string(r) + "][" +
                                        std::to_string(c) + "]");
    }
    return m;
}

inline RealPolynomial parse_polynomial(const Json& j, std::vector<std::string>& issues,
                                       const std::string& where) {
    if (!j.is_array() || j.empty()) {
        issues.push_back(where + ": expected a coefficient list [c0, c1, ...]");
        return RealPolynomial();
    }
    std::vector<double> coeffs;
    for (const auto& c : j) {
        if (!c.is_number()) {
            issues.push_back(where + ": coefficients must be real numbers");
            return RealPolynomial();
        }
        coeffs.push_back(c.get<double>());
    }
    return RealPolynomial(std::move(coeffs));
}

}  // namespace detail_config

inline RunConfig parse_config(const Json& doc) {
    using detail_config::parse_complex;
    using detail_config::parse_matrix;
    using detail_config::parse_polynomial;

    std::vector<std::string> issues;
    RunConfig cfg;
    cfg.echo = doc;

    const std::string mode = doc.value("mode", "");
    if (mode == "sigma") cfg.mode = RunMode::Sigma;
    else if (mode == "grav") cfg.mode = RunMode::Grav;
    else if (mode == "ernst") cfg.mode = RunMode::Ernst;
    else if (mode == "verify") cfg.mode = RunMode::Verify;
    else if (mode == "sqrt-demo") cfg.mode = RunMode::SqrtDemo;
    else issues.push_back("mode: must be one of sigma|grav|ernst|verify|sqrt-demo");

    if (doc.contains("output")) {
        const Json& out = doc["output"];
        cfg.field_file = out.value("field", cfg.field_file);
        cfg.sidecar_file = out.value("sidecar", cfg.sidecar_file);
    }

    if (cfg.mode == RunMode::Verify) {
        if (!doc.contains("input") || !doc["input"].contains("field") ||
            !doc["input"].contains("sidecar"))
            issues.push_back("verify mode needs input.field and input.sidecar paths");
        else {
            cfg.verify_field = doc["input"]["field"].get<std::string>();
            cfg.verify_sidecar = doc["input"]["sidecar"].get<std::string>();
        }
        if (!issues.empty()) throw ValidationError(std::move(issues));
        return cfg;
    }

    // Background.
    std::size_t p = 1;
    if (!doc.contains("background")) {
        issues.push_back("background: section missing");
    } else {
        const Json& bgj = doc["background"];
        p = bgj.value("p", 1);
        const std::string seed = bgj.value("seed", "exp-diag");
        if (seed != "exp-diag")
            issues.push_back("background.seed: only exp-diag is configurable here");
        if (!bgj.contains("f") || !bgj.contains("h")) {
            issues.push_back("background: f and h coefficient lists required");
        } else if (p == 0) {
            issues.push_back("background.p: must be >= 1");
        } else {
            RealPolynomial f = parse_polynomial(bgj["f"], issues, "background.f");
            RealPolynomial h = parse_polynomial(bgj["h"], issues, "background.h");
            if (issues.empty()) cfg.background = Background::exp_diag(f, h, p);
        }
    }

    // Triple.
    if (!doc.contains("triple")) {
        issues.push_back("triple: section missing");
    } else {
        const Json& tj = doc["triple"];
        std::optional<JordanSpec> spec;
        if (!tj.contains("jordan") || !tj["jordan"].contains("blocks")) {
            issues.push_back("triple.jordan.blocks: required, as [re, im, size] entries");
        } else {
            std::vector<JordanBlock> blocks;
            for (const auto& b : tj["jordan"]["blocks"]) {
                if (!b.is_array() || b.size() != 3) {
                    issues.push_back("triple.jordan.blocks: entries must be [re, im, size]");
                    break;
                }
                blocks.push_back({Complex(b[0].get<double>(), b[1].get<double>()),
                                  std::size_t(b[2].get<double>())});
            }
            if (!blocks.empty()) {
                try {
                    if (tj["jordan"].contains("similarity"))
                        spec.emplace(blocks, parse_matrix(tj["jordan"]["similarity"], issues,
                                                          "triple.jordan.similarity"));
                    else
                        spec.emplace(blocks);
                } catch (const Error& e) {
                    issues.push_back(std::string("triple.jordan: ") + e.what());
                }
            }
        }

        ComplexMatrix jmat;
        const std::string jname = tj.value("J", "offdiag");
        try {
            if (jname == "offdiag") jmat = make_j_matrix(JKind::OffDiagonal, p);
            else if (jname == "i-offdiag") jmat = make_j_matrix(JKind::ImaginaryOffDiagonal, p);
            else if (jname == "pauli2") jmat = make_j_matrix(JKind::Pauli2, p);
            else issues.push_back("triple.J: must be offdiag|i-offdiag|pauli2");
        } catch (const Error& e) {
            issues.push_back(std::string("triple.J: ") + e.what());
        }

        if (spec && tj.contains("S0") && tj.contains("Pi0") && jmat.rows() > 0) {
            ComplexMatrix s0 = parse_matrix(tj["S0"], issues, "triple.S0");
            ComplexMatrix pi0 = parse_matrix(tj["Pi0"], issues, "triple.Pi0");
            if (issues.empty()) {
                try {
                    cfg.triple.emplace(*spec, s0, pi0, jmat);
                } catch (const ValidationError& e) {
                    for (const auto& s : e.issues) issues.push_back("triple: " + s);
                }
            }
        } else if (spec) {
            if (!tj.contains("S0")) issues.push_back("triple.S0: required");
            if (!tj.contains("Pi0")) issues.push_back("triple.Pi0: required");
        }

        if (tj.contains("branch")) {
            std::vector<int> signs;
            for (const auto& s : tj["branch"])
                signs.push_back(s.get<double>() >= 0 ? 1 : -1);
            cfg.branch = BranchChoice(signs);
        }
    }

    // Domain.
    if (cfg.mode != RunMode::Verify) {
        if (!doc.contains("domain")) {
            issues.push_back("domain: section missing");
        } else {
            const Json& dj = doc["domain"];
            const bool have = dj.contains("xi") && dj.contains("eta") && dj.contains("step");
            if (!have || !dj["xi"].is_array() || dj["xi"].size() != 2 ||
                !dj["eta"].is_array() || dj["eta"].size() != 2) {
                issues.push_back("domain: needs xi:[min,max], eta:[min,max], step");
            } else {
                try {
                    cfg.grid = Grid::box(dj["xi"][0], dj["xi"][1], dj["eta"][0],
                                         dj["eta"][1], dj["step"]);
                } catch (const Error& e) {
                    issues.push_back(std::string("domain: ") + e.what());
                }
            }
        }
    }

    const std::string assembly = doc.value("assembly", "ode");
    if (assembly == "ode") cfg.assembly = SigmaAssembly::OdePropagation;
    else if (assembly == "explicit") cfg.assembly = SigmaAssembly::ExplicitJordan2;
    else issues.push_back("assembly: must be ode|explicit");

    const std::string anchor = doc.value("anchor", "explicit");
    if (anchor == "explicit") cfg.anchor = Anchor::ExplicitField;
    else if (anchor == "jordan") cfg.anchor = Anchor::JordanMatrix;
    else issues.push_back("anchor: must be explicit|jordan");

    if (doc.contains("path")) cfg.path_step = doc["path"].value("step", 1e-3);
    if (!(cfg.path_step > 0) || cfg.path_step > 0.1)
        issues.push_back("path.step: must lie in (0, 0.1]");

    if (cfg.mode == RunMode::Ernst) {
        if (!doc.contains("hamiltonian")) {
            issues.push_back("hamiltonian: section required in ernst mode");
        } else {
            const Json& hj = doc["hamiltonian"];
            const std::string family = hj.value("family", "constant");
            try {
                if (family == "constant") {
                    ComplexMatrix g = hj.contains("base")
                                          ? parse_matrix(hj["base"], issues, "hamiltonian.base")
                                          : ComplexMatrix::identity(2 * p);
                    if (issues.empty()) cfg.hamiltonians = HamiltonianPair::constant(g);
                } else if (family == "shift-profile") {
                    ComplexMatrix g = parse_matrix(hj.at("base"), issues, "hamiltonian.base");
                    RealPolynomial prof =
                        parse_polynomial(hj.at("profile"), issues, "hamiltonian.profile");
                    if (issues.empty())
                        cfg.hamiltonians = HamiltonianPair::shift_profile(prof, g);
                } else {
                    issues.push_back("hamiltonian.family: must be constant|shift-profile");
                }
            } catch (const ValidationError& e) {
                for (const auto& s : e.issues) issues.push_back("hamiltonian: " + s);
            } catch (const Json::exception&) {
                issues.push_back("hamiltonian: base and profile required for shift-profile");
            }
        }
        cfg.z_samples = doc.value("z_samples", 8);
        if (cfg.z_samples < 1 || cfg.z_samples > 64)
            issues.push_back("z_samples: must lie in [1, 64]");
    }

    if (!issues.empty()) throw ValidationError(std::move(issues));
    return cfg;
}

inline RunConfig parse_config_text(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::exception& e) {
        throw ValidationError({std::string("config is not valid JSON: ") + e.what()});
    }
    return parse_config(doc);
}

}  // namespace gbdt
