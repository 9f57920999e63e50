#pragma once

#include <complex>
#include <string>
#include <vector>

#include "antw/state_space.hpp"

namespace antw {

// Real polynomial, coefficients in descending powers of s.
struct Polynomial {
    std::vector<double> coeffs;

    Polynomial() = default;
    Polynomial(std::initializer_list<double> c) : coeffs(c) {}
    explicit Polynomial(std::vector<double> c) : coeffs(std::move(c)) {}

    int degree() const;
    std::complex<double> eval(std::complex<double> s) const;
    Polynomial trimmed() const;  // drops leading (near-)zeros
};

Polynomial operator*(const Polynomial& a, const Polynomial& b);
Polynomial operator+(const Polynomial& a, const Polynomial& b);
Polynomial operator*(double c, const Polynomial& a);

// Matrix of SISO rationals n_ij(s) / d_ij(s).
struct RationalTransfer {
    int rows = 0, cols = 0;
    std::vector<Polynomial> num;  // row-major
    std::vector<Polynomial> den;

    static RationalTransfer siso(Polynomial n, Polynomial d);
    static RationalTransfer constant(double c);

    const Polynomial& num_at(int i, int j) const { return num[i * cols + j]; }
    const Polynomial& den_at(int i, int j) const { return den[i * cols + j]; }
    bool entry_proper(int i, int j) const;

    CMat eval(std::complex<double> s) const;
};

// Controllable-canonical realization built per input column (shared column
// denominator = product of entry denominators). Throws on improper entries.
StateSpaceModel to_state_space(const RationalTransfer& t);

std::string to_json_string(const RationalTransfer& t);
RationalTransfer rational_from_json_string(const std::string& text);

}  // namespace antw
