#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "gbdt/errors.hpp"
#include "gbdt/matrix.hpp"

namespace gbdt {

/// Rectangular lattice xi_i = xi0 + i dxi, eta_j = eta0 + j deta.
struct Grid {
    double xi0 = 0.0, eta0 = 0.0;
    double dxi = 1e-2, deta = 1e-2;
    std::size_t nxi = 1, neta = 1;

    static Grid box(double xi_min, double xi_max, double eta_min, double eta_max,
                    double step) {
        if (!(step > 0) || xi_max < xi_min || eta_max < eta_min)
            throw ValidationError({"invalid grid box"});
        Grid g;
        g.xi0 = xi_min;
        g.eta0 = eta_min;
        g.dxi = g.deta = step;
        g.nxi = std::size_t(std::round((xi_max - xi_min) / step)) + 1;
        g.neta = std::size_t(std::round((eta_max - eta_min) / step)) + 1;
        return g;
    }

    double xi(std::size_t i) const { return xi0 + double(i) * dxi; }
    double eta(std::size_t j) const { return eta0 + double(j) * deta; }
    std::size_t size() const { return nxi * neta; }
    std::size_t index(std::size_t i, std::size_t j) const { return j * nxi + i; }
};

/// Per-point outcome of a grid computation. Points failing a precondition
/// carry a status flag instead of a value; nothing is extrapolated.
enum class PointStatus : int {
    Ok = 0,
    Unreachable = 1,   // an earlier point on the shared path already failed
    AlphaZero = 2,     // alpha vanishes on the integration path
    SingularA = 3,     // A or A -+ I singular / beyond the condition limit
    SingularS = 4,     // S singular / beyond the condition limit
    Resonant = 5,      // Sylvester spectra collide at this point
    BranchCut = 6,     // square-root branch point or cut proximity
    Failed = 7,        // any other per-point failure
};

/// Lattice of matrix values (m rows; square unless cols_override is set)
/// with per-point flags; the unit of export.
struct FieldGrid {
    Grid grid;
    std::size_t m = 0;
    std::size_t cols_override = 0;      // 0 means square (cols == m)
    std::vector<int> status;            // PointStatus as int, one per point
    std::vector<ComplexMatrix> values;  // valid when status == Ok
    std::vector<double> alpha;          // alpha at each point

    FieldGrid() = default;
    FieldGrid(const Grid& g, std::size_t m_, std::size_t cols = 0)
        : grid(g), m(m_), cols_override(cols == m_ ? 0 : cols),
          status(g.size(), int(PointStatus::Failed)), values(g.size()),
          alpha(g.size(), 0.0) {}

    std::size_t cols() const { return cols_override ? cols_override : m; }
    bool ok(std::size_t idx) const { return status[idx] == int(PointStatus::Ok); }

    double coverage() const {
        if (status.empty()) return 0.0;
        std::size_t good = 0;
        for (int s : status) good += (s == int(PointStatus::Ok));
        return double(good) / double(status.size());
    }
};

}  // namespace gbdt
