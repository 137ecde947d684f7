#pragma once

#include <cstddef>
#include <initializer_list>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "opalab/scalar.hpp"

namespace opalab {

/// Finite real-coefficient polynomial a_0 + a_1 z + ... + a_d z^d stored
/// densely in increasing degree order. The stored degree is the index of
/// the last coefficient whether or not it is zero (storage convention,
/// not mathematical degree). Coefficients must be finite; the list is
/// never empty.
template <class Real = double>
class Polynomial {
public:
    Polynomial() : coef_{Real(0)} {}

    explicit Polynomial(std::vector<Real> coeffs) : coef_(std::move(coeffs)) {
        if (coef_.empty()) throw std::invalid_argument("Polynomial: empty coefficient list");
        for (const Real& c : coef_)
            if (!is_finite_value(c)) throw std::domain_error("Polynomial: non-finite coefficient");
    }

    Polynomial(std::initializer_list<Real> coeffs) : Polynomial(std::vector<Real>(coeffs)) {}

    static Polynomial constant(const Real& a0) { return Polynomial(std::vector<Real>{a0}); }

    int degree() const { return static_cast<int>(coef_.size()) - 1; }
    const std::vector<Real>& coeffs() const { return coef_; }

    /// Coefficient of z^k, zero outside the stored range.
    Real coeff(int k) const {
        if (k < 0 || k > degree()) return Real(0);
        return coef_[static_cast<std::size_t>(k)];
    }

    Real operator()(const Real& x) const {
        Real acc(0);
        for (std::size_t i = coef_.size(); i-- > 0;) acc = acc * x + coef_[i];
        return acc;
    }

    Real max_abs_coeff() const {
        Real m(0);
        for (const Real& c : coef_) m = max_value(m, abs_value(c));
        return m;
    }

    bool is_zero() const {
        for (const Real& c : coef_)
            if (c != Real(0)) return false;
        return true;
    }

    /// Multiply by z^m (prepend m zero coefficients).
    Polynomial shifted(int m) const {
        if (m < 0) throw std::invalid_argument("Polynomial::shifted: negative shift");
        std::vector<Real> c(coef_.size() + static_cast<std::size_t>(m), Real(0));
        for (std::size_t i = 0; i < coef_.size(); ++i) c[i + static_cast<std::size_t>(m)] = coef_[i];
        return Polynomial(std::move(c));
    }

    /// Synthetic division by (z - root): returns the quotient and the
    /// remainder, which equals the value at the root.
    std::pair<Polynomial, Real> deflate(const Real& root) const {
        if (degree() == 0) return {Polynomial(), coef_[0]};
        std::vector<Real> q(coef_.size() - 1, Real(0));
        Real carry = coef_.back();
        for (int k = degree() - 1; k >= 0; --k) {
            q[static_cast<std::size_t>(k)] = carry;
            carry = coef_[static_cast<std::size_t>(k)] + root * carry;
        }
        return {Polynomial(std::move(q)), carry};
    }

    friend Polynomial operator*(const Polynomial& f, const Polynomial& g) {
        std::vector<Real> c(f.coef_.size() + g.coef_.size() - 1, Real(0));
        for (std::size_t i = 0; i < f.coef_.size(); ++i)
            for (std::size_t j = 0; j < g.coef_.size(); ++j) c[i + j] += f.coef_[i] * g.coef_[j];
        return Polynomial(std::move(c));
    }

    friend Polynomial operator*(const Real& s, const Polynomial& f) {
        std::vector<Real> c = f.coef_;
        for (Real& v : c) v *= s;
        return Polynomial(std::move(c));
    }

    friend Polynomial operator+(const Polynomial& f, const Polynomial& g) {
        std::vector<Real> c(max_value(f.coef_.size(), g.coef_.size()), Real(0));
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = f.coeff(static_cast<int>(i)) + g.coeff(static_cast<int>(i));
        return Polynomial(std::move(c));
    }

    friend Polynomial operator-(const Polynomial& f, const Polynomial& g) {
        std::vector<Real> c(max_value(f.coef_.size(), g.coef_.size()), Real(0));
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = f.coeff(static_cast<int>(i)) - g.coeff(static_cast<int>(i));
        return Polynomial(std::move(c));
    }

    friend std::ostream& operator<<(std::ostream& os, const Polynomial& f) {
        os << "[";
        for (std::size_t i = 0; i < f.coef_.size(); ++i) {
            if (i) os << ", ";
            os << static_cast<double>(f.coef_[i]);
        }
        return os << "]";
    }

private:
    std::vector<Real> coef_;
};

/// Coefficient sign-flip map f(z) -> f(-z).
template <class Real>
Polynomial<Real> alternate_signs(const Polynomial<Real>& f) {
    std::vector<Real> c = f.coeffs();
    for (std::size_t i = 1; i < c.size(); i += 2) c[i] = -c[i];
    return Polynomial<Real>(std::move(c));
}

/// Coefficient-wise absolute value.
template <class Real>
Polynomial<Real> absolute_coeffs(const Polynomial<Real>& f) {
    std::vector<Real> c = f.coeffs();
    for (Real& v : c) v = abs_value(v);
    return Polynomial<Real>(std::move(c));
}

}  // namespace opalab
