// Quantum tori: noncommutative Laurent polynomials in generators x_1..x_n
// subject to x_i x_j = A^{<e_i,e_j>} x_j x_i for an antisymmetric integer
// form.  Monomials are stored in the normal order x_1^{u_1} ... x_n^{u_n}.
#pragma once

#include "q3t/scalar.hpp"

#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace q3t {

using Exps = std::vector<std::int64_t>;

class CommutationForm {
public:
    CommutationForm() = default;
    explicit CommutationForm(std::size_t n) : n_(n), m_(n * n, 0) {}

    [[nodiscard]] std::size_t size() const { return n_; }
    [[nodiscard]] std::int64_t at(std::size_t i, std::size_t j) const { return m_[i * n_ + j]; }
    // Sets <e_i,e_j> = v and <e_j,e_i> = -v.
    void set(std::size_t i, std::size_t j, std::int64_t v);

    // sum_{i,j} u_i v_j <e_i,e_j>
    [[nodiscard]] std::int64_t bilinear(const Exps& u, const Exps& v) const;
    // kappa(u,v) = sum_{i>j} u_i v_j <e_i,e_j>: x^u x^v = A^{kappa} x^{u+v}
    [[nodiscard]] std::int64_t kappa(const Exps& u, const Exps& v) const;
    // Half-exponent of the Weyl prefactor: -sum_{i<j} u_i u_j <e_i,e_j>
    [[nodiscard]] std::int64_t weyl_half_exponent(const Exps& u) const;
    // Number of unordered pairs {i,j} with a nonzero entry.
    [[nodiscard]] std::size_t nonzero_pairs() const;

private:
    std::size_t n_ = 0;
    std::vector<std::int64_t> m_;
};

struct Monomial {
    Scalar coeff;
    Exps exps;
};

class TorusElement {
public:
    using Terms = std::map<Exps, Scalar>;

    TorusElement() = default;
    explicit TorusElement(std::size_t n) : n_(n) {}
    TorusElement(std::size_t n, const Scalar& c);  // constant c
    explicit TorusElement(const Monomial& m);

    static TorusElement monomial(const Scalar& c, Exps u);
    static TorusElement generator(std::size_t n, std::size_t i, std::int64_t power = 1);

    [[nodiscard]] std::size_t ngens() const { return n_; }
    [[nodiscard]] const Terms& terms() const { return terms_; }
    [[nodiscard]] bool is_zero() const { return terms_.empty(); }
    [[nodiscard]] bool is_monomial() const { return terms_.size() == 1; }
    [[nodiscard]] Monomial as_monomial() const;  // throws unless is_monomial()
    [[nodiscard]] Scalar coefficient(const Exps& u) const;

    void add_term(const Exps& u, const Scalar& c);
    TorusElement& operator+=(const TorusElement& o);
    TorusElement& operator-=(const TorusElement& o);
    TorusElement operator-() const;
    TorusElement& scale(const Scalar& c);

    friend TorusElement operator+(TorusElement a, const TorusElement& b) { return a += b; }
    friend TorusElement operator-(TorusElement a, const TorusElement& b) { return a -= b; }
    friend TorusElement operator*(const Scalar& c, TorusElement a) { return a.scale(c); }
    friend bool operator==(const TorusElement& a, const TorusElement& b) {
        return a.n_ == b.n_ && a.terms_ == b.terms_;
    }

private:
    void check_compatible(const TorusElement& o) const;
    std::size_t n_ = 0;
    Terms terms_;
};

// Core operations over an explicit form.
TorusElement mul(const TorusElement& a, const TorusElement& b, const CommutationForm& F);
Monomial mul(const Monomial& a, const Monomial& b, const CommutationForm& F);
TorusElement weyl(const Exps& u, const CommutationForm& F);
Monomial weyl_monomial(const Exps& u, const CommutationForm& F);
Monomial pow(const Monomial& m, std::int64_t k, const CommutationForm& F);
Monomial inverse(const Monomial& m, const CommutationForm& F);
// Evaluates each normal-ordered monomial numerically.  The assignment must
// provide one value per generator.
std::complex<double> specialize(const TorusElement& a, const CommutationForm& F,
                                const std::vector<std::complex<double>>& assignment,
                                std::complex<double> s);

// Exponent-vector helpers.
Exps exps_add(const Exps& a, const Exps& b);
Exps exps_sub(const Exps& a, const Exps& b);
Exps exps_scale(const Exps& a, std::int64_t k);
bool exps_is_zero(const Exps& a);

// A quantum torus with named generators: convenience wrapper bundling the
// form with registry names for rendering and parsing.
class QuantumTorus {
public:
    QuantumTorus() = default;
    QuantumTorus(CommutationForm form, std::vector<std::string> names);

    [[nodiscard]] const CommutationForm& form() const { return form_; }
    [[nodiscard]] const std::vector<std::string>& names() const { return names_; }
    [[nodiscard]] std::size_t ngens() const { return form_.size(); }
    [[nodiscard]] std::optional<std::size_t> index_of(std::string_view name) const;

    [[nodiscard]] TorusElement one() const { return {ngens(), Scalar::one()}; }
    [[nodiscard]] TorusElement constant(const Scalar& c) const { return {ngens(), c}; }
    [[nodiscard]] TorusElement gen(std::size_t i, std::int64_t k = 1) const {
        return TorusElement::generator(ngens(), i, k);
    }
    [[nodiscard]] TorusElement mul(const TorusElement& a, const TorusElement& b) const {
        return q3t::mul(a, b, form_);
    }
    [[nodiscard]] TorusElement weyl(const Exps& u) const { return q3t::weyl(u, form_); }
    // Integer power; negative powers need a monomial.
    [[nodiscard]] TorusElement pow(const TorusElement& a, std::int64_t k) const;
    // a·b - b·a
    [[nodiscard]] TorusElement commutator(const TorusElement& a, const TorusElement& b) const;

    // "coeff * g3^2 g7^-1 + ..." with registry names.
    [[nodiscard]] std::string render(const TorusElement& a) const;

    // Resolves a non-reserved identifier to an element; returns nullopt if unknown.
    using Resolver = std::function<std::optional<TorusElement>(std::string_view)>;
    // Parses sums of products of scalars and named factors; the product is
    // taken in the written order.  Unknown identifiers fall back to
    // generator names.  Throws std::invalid_argument on errors.
    [[nodiscard]] TorusElement parse(std::string_view text, const Resolver& resolver = {}) const;

private:
    CommutationForm form_;
    std::vector<std::string> names_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

}  // namespace q3t
