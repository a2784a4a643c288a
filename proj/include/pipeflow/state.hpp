#pragma once

#include <cmath>

#include "pipeflow/errors.hpp"

namespace pipeflow {

/// Conserved pair at a point: density rho > 0 and momentum density q.
/// Velocity is always derived, never stored.
struct State {
    double rho = 1.0;
    double q = 0.0;

    double velocity() const { return q / rho; }

    bool finite() const { return std::isfinite(rho) && std::isfinite(q); }
    bool valid() const { return finite() && rho > 0.0; }
};

inline void require_valid(const State& u, const char* where) {
    if (!u.valid())
        throw DomainError(std::string(where) +
                          ": state must have finite components and rho > 0");
}

inline State operator+(State a, const State& b) {
    a.rho += b.rho;
    a.q += b.q;
    return a;
}

inline State operator-(State a, const State& b) {
    a.rho -= b.rho;
    a.q -= b.q;
    return a;
}

/// Component-sum norm |drho| + |dq|; the convention used for wave strengths,
/// TV, and L1 distances throughout.
inline double norm1(const State& u) { return std::abs(u.rho) + std::abs(u.q); }

} // namespace pipeflow
