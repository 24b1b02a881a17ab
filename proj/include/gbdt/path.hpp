#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "gbdt/errors.hpp"

namespace gbdt {

struct Point {
    double xi = 0.0;
    double eta = 0.0;
};

inline double distance(Point a, Point b) {
    return std::hypot(b.xi - a.xi, b.eta - a.eta);
}

/// Polyline from the origin to a target with a fixed integration step.
struct PathSpec {
    std::vector<Point> waypoints;  // first waypoint must be (0,0)
    double step = 1e-3;

    /// Axis-aligned default: (0,0) -> (xi,0) -> (xi,eta).
    static PathSpec l_path(Point target, double step = 1e-3) {
        return {{Point{0, 0}, Point{target.xi, 0}, target}, step};
    }

    /// The mirrored order: (0,0) -> (0,eta) -> (xi,eta).
    static PathSpec eta_first(Point target, double step = 1e-3) {
        return {{Point{0, 0}, Point{0, target.eta}, target}, step};
    }

    /// Axis-aligned staircase with `legs` treads per direction; exists for
    /// path-independence testing.
    static PathSpec staircase(Point target, int legs = 4, double step = 1e-3) {
        PathSpec p;
        p.step = step;
        p.waypoints.push_back({0, 0});
        double xi = 0, eta = 0;
        for (int k = 1; k <= legs; ++k) {
            xi = target.xi * double(k) / double(legs);
            p.waypoints.push_back({xi, eta});
            eta = target.eta * double(k) / double(legs);
            p.waypoints.push_back({xi, eta});
        }
        return p;
    }

    /// Single straight segment to the target.
    static PathSpec direct(Point target, double step = 1e-3) {
        return {{Point{0, 0}, target}, step};
    }

    Point target() const { return waypoints.empty() ? Point{0, 0} : waypoints.back(); }

    double length() const {
        double len = 0.0;
        for (std::size_t k = 1; k < waypoints.size(); ++k)
            len += distance(waypoints[k - 1], waypoints[k]);
        return len;
    }

    void validate(double max_step = 1.0) const {
        std::vector<std::string> issues;
        if (waypoints.size() < 1) issues.push_back("path has no waypoints");
        if (!waypoints.empty() &&
            (waypoints.front().xi != 0.0 || waypoints.front().eta != 0.0))
            issues.push_back("path must start at (0,0)");
        if (!(step > 0.0)) issues.push_back("path step must be positive");
        if (step > max_step) issues.push_back("path step exceeds declared maximum");
        if (!issues.empty()) throw ValidationError(std::move(issues));
    }
};

}  // namespace gbdt
