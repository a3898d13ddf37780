// Exact scalars in Z[i][A^{±1/2}].
//
// A GaussianHalfLaurent is a finite sum  sum_n c_n A^{n/2}  with Gaussian
// integer coefficients c_n of arbitrary precision.  The formal square roots
// used throughout the library are fixed once and for all:
//   (-A^2)^{1/2} = iA,   (-1)^{1/2} = i.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace q3t {

using BigInt = boost::multiprecision::cpp_int;

struct GaussianInt {
    BigInt re{0};
    BigInt im{0};

    GaussianInt() = default;
    GaussianInt(BigInt r, BigInt i) : re(std::move(r)), im(std::move(i)) {}
    explicit GaussianInt(long long r) : re(r), im(0) {}

    [[nodiscard]] bool is_zero() const { return re == 0 && im == 0; }
    [[nodiscard]] bool is_unit() const;  // one of 1, -1, i, -i
    [[nodiscard]] GaussianInt conj() const { return {re, -im}; }
    [[nodiscard]] std::complex<double> to_complex() const;

    friend GaussianInt operator+(const GaussianInt& a, const GaussianInt& b) {
        return {a.re + b.re, a.im + b.im};
    }
    friend GaussianInt operator-(const GaussianInt& a, const GaussianInt& b) {
        return {a.re - b.re, a.im - b.im};
    }
    friend GaussianInt operator*(const GaussianInt& a, const GaussianInt& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    GaussianInt operator-() const { return {-re, -im}; }
    friend bool operator==(const GaussianInt& a, const GaussianInt& b) {
        return a.re == b.re && a.im == b.im;
    }
};

// Renders "a", "bi" or "(a+bi)"; 1·i is rendered "i".
std::string to_string(const GaussianInt& g);

class GaussianHalfLaurent {
public:
    using Terms = std::map<std::int64_t, GaussianInt>;  // key n means A^{n/2}

    GaussianHalfLaurent() = default;
    explicit GaussianHalfLaurent(long long c);
    GaussianHalfLaurent(GaussianInt c, std::int64_t half_exp);

    static GaussianHalfLaurent zero() { return {}; }
    static GaussianHalfLaurent one() { return GaussianHalfLaurent(1); }
    static GaussianHalfLaurent i() { return {GaussianInt(0, 1), 0}; }
    // A^{n/2}
    static GaussianHalfLaurent a_half(std::int64_t n) { return {GaussianInt(1), n}; }
    // A^k
    static GaussianHalfLaurent a_pow(std::int64_t k) { return a_half(2 * k); }
    // (-A^2)^{m/2} · A^{n/2} = i^m A^{m + n/2}
    static GaussianHalfLaurent from_phase(std::int64_t m, std::int64_t n_half);

    [[nodiscard]] const Terms& terms() const { return terms_; }
    [[nodiscard]] bool is_zero() const { return terms_.empty(); }
    // True iff the value is u·A^{n/2} with u a Gaussian unit.
    [[nodiscard]] bool is_unit() const;
    // Inverse of a unit; throws std::domain_error otherwise.
    [[nodiscard]] GaussianHalfLaurent inverse() const;
    // Numerical value at A^{1/2} = s.  Throws std::domain_error for s = 0.
    [[nodiscard]] std::complex<double> eval(std::complex<double> s) const;

    GaussianHalfLaurent& operator+=(const GaussianHalfLaurent& o);
    GaussianHalfLaurent& operator-=(const GaussianHalfLaurent& o);
    GaussianHalfLaurent& operator*=(const GaussianHalfLaurent& o);
    GaussianHalfLaurent operator-() const;
    [[nodiscard]] GaussianHalfLaurent pow(std::int64_t k) const;

    friend GaussianHalfLaurent operator+(GaussianHalfLaurent a, const GaussianHalfLaurent& b) {
        return a += b;
    }
    friend GaussianHalfLaurent operator-(GaussianHalfLaurent a, const GaussianHalfLaurent& b) {
        return a -= b;
    }
    friend GaussianHalfLaurent operator*(const GaussianHalfLaurent& a, const GaussianHalfLaurent& b);
    friend bool operator==(const GaussianHalfLaurent& a, const GaussianHalfLaurent& b) {
        return a.terms_ == b.terms_;
    }

    // Terms by ascending half-exponent, e.g. "1 - 2iA^(1/2) + (1+i)A^2".
    [[nodiscard]] std::string to_string() const;
    // Parses the grammar produced by to_string(), plus products, parentheses
    // and integer powers.  Throws std::invalid_argument on malformed input.
    static GaussianHalfLaurent parse(std::string_view text);

private:
    void add_term(std::int64_t n, const GaussianInt& c);
    Terms terms_;
};

using Scalar = GaussianHalfLaurent;

// Free-function forms of the ring operations.
inline Scalar add(const Scalar& a, const Scalar& b) { return a + b; }
inline Scalar mul(const Scalar& a, const Scalar& b) { return a * b; }
inline Scalar from_phase(std::int64_t m, std::int64_t n_half) {
    return Scalar::from_phase(m, n_half);
}
inline std::complex<double> eval(const Scalar& a, std::complex<double> s) { return a.eval(s); }

// Renders the A-power part: "", "A", "A^2", "A^-1", "A^(1/2)", "A^(-3/2)".
std::string a_power_string(std::int64_t half_exp);

}  // namespace q3t
