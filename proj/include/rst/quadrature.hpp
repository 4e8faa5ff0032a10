#pragma once

#include <cstdint>
#include <vector>

namespace rst::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

/// Gauss-Legendre rule with n nodes on [a, b].
Rule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// Gauss-Laguerre rule for the weight e^{-u} on [0, inf).
Rule gauss_laguerre(int n);

/// Evenly spaced nodes including both endpoints; n >= 2.
std::vector<double> linspace(double a, double b, int n);

/// Radical-inverse (van der Corput) of index in the given prime base.
double radical_inverse(std::uint64_t index, int base);

} // namespace rst::quad
