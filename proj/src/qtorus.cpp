#include "q3t/qtorus.hpp"

#include <cctype>
#include <stdexcept>

namespace q3t {

// ---------------------------------------------------------------- form

void CommutationForm::set(std::size_t i, std::size_t j, std::int64_t v) {
    if (i >= n_ || j >= n_) throw std::out_of_range("CommutationForm::set: index out of range");
    if (i == j && v != 0) throw std::invalid_argument("CommutationForm::set: diagonal must vanish");
    m_[i * n_ + j] = v;
    m_[j * n_ + i] = -v;
}

std::int64_t CommutationForm::bilinear(const Exps& u, const Exps& v) const {
    std::int64_t acc = 0;
    for (std::size_t i = 0; i < n_; ++i) {
        if (u[i] == 0) continue;
        for (std::size_t j = 0; j < n_; ++j) acc += u[i] * v[j] * m_[i * n_ + j];
    }
    return acc;
}

std::int64_t CommutationForm::kappa(const Exps& u, const Exps& v) const {
    std::int64_t acc = 0;
    for (std::size_t i = 1; i < n_; ++i) {
        if (u[i] == 0) continue;
        for (std::size_t j = 0; j < i; ++j) acc += u[i] * v[j] * m_[i * n_ + j];
    }
    return acc;
}

std::int64_t CommutationForm::weyl_half_exponent(const Exps& u) const {
    std::int64_t acc = 0;
    for (std::size_t i = 0; i < n_; ++i) {
        if (u[i] == 0) continue;
        for (std::size_t j = i + 1; j < n_; ++j) acc += u[i] * u[j] * m_[i * n_ + j];
    }
    return -acc;
}

std::size_t CommutationForm::nonzero_pairs() const {
    std::size_t count = 0;
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i + 1; j < n_; ++j)
            if (m_[i * n_ + j] != 0) ++count;
    return count;
}

// ---------------------------------------------------------------- exponent helpers

Exps exps_add(const Exps& a, const Exps& b) {
    Exps r(a);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
    return r;
}

Exps exps_sub(const Exps& a, const Exps& b) {
    Exps r(a);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    return r;
}

Exps exps_scale(const Exps& a, std::int64_t k) {
    Exps r(a);
    for (auto& x : r) x *= k;
    return r;
}

bool exps_is_zero(const Exps& a) {
    for (auto x : a)
        if (x != 0) return false;
    return true;
}

// ---------------------------------------------------------------- elements

TorusElement::TorusElement(std::size_t n, const Scalar& c) : n_(n) {
    add_term(Exps(n, 0), c);
}

TorusElement::TorusElement(const Monomial& m) : n_(m.exps.size()) {
    add_term(m.exps, m.coeff);
}

TorusElement TorusElement::monomial(const Scalar& c, Exps u) {
    return TorusElement(Monomial{c, std::move(u)});
}

TorusElement TorusElement::generator(std::size_t n, std::size_t i, std::int64_t power) {
    Exps u(n, 0);
    u.at(i) = power;
    return monomial(Scalar::one(), std::move(u));
}

Monomial TorusElement::as_monomial() const {
    if (!is_monomial()) throw std::invalid_argument("TorusElement is not a single monomial");
    const auto& [u, c] = *terms_.begin();
    return {c, u};
}

Scalar TorusElement::coefficient(const Exps& u) const {
    auto it = terms_.find(u);
    return it == terms_.end() ? Scalar::zero() : it->second;
}

void TorusElement::add_term(const Exps& u, const Scalar& c) {
    if (u.size() != n_) throw std::invalid_argument("TorusElement: exponent vector length mismatch");
    if (c.is_zero()) return;
    auto [it, inserted] = terms_.try_emplace(u, c);
    if (!inserted) {
        it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

void TorusElement::check_compatible(const TorusElement& o) const {
    if (n_ != o.n_)
        throw std::invalid_argument("TorusElement: mismatched generator counts (" +
                                    std::to_string(n_) + " vs " + std::to_string(o.n_) + ")");
}

TorusElement& TorusElement::operator+=(const TorusElement& o) {
    check_compatible(o);
    for (const auto& [u, c] : o.terms_) add_term(u, c);
    return *this;
}

TorusElement& TorusElement::operator-=(const TorusElement& o) {
    check_compatible(o);
    for (const auto& [u, c] : o.terms_) add_term(u, -c);
    return *this;
}

TorusElement TorusElement::operator-() const {
    TorusElement r(n_);
    for (const auto& [u, c] : terms_) r.terms_.emplace(u, -c);
    return r;
}

TorusElement& TorusElement::scale(const Scalar& c) {
    if (c.is_zero()) {
        terms_.clear();
        return *this;
    }
    for (auto it = terms_.begin(); it != terms_.end();) {
        it->second *= c;
        if (it->second.is_zero()) {
            it = terms_.erase(it);
        } else {
            ++it;
        }
    }
    return *this;
}

// ---------------------------------------------------------------- operations

Monomial mul(const Monomial& a, const Monomial& b, const CommutationForm& F) {
    if (a.exps.size() != F.size() || b.exps.size() != F.size())
        throw std::invalid_argument("mul: monomial length does not match the form");
    return {a.coeff * b.coeff * Scalar::a_half(2 * F.kappa(a.exps, b.exps)),
            exps_add(a.exps, b.exps)};
}

TorusElement mul(const TorusElement& a, const TorusElement& b, const CommutationForm& F) {
    if (a.ngens() != F.size() || b.ngens() != F.size())
        throw std::invalid_argument("mul: mismatched generator counts (" +
                                    std::to_string(a.ngens()) + ", " + std::to_string(b.ngens()) +
                                    ") for a form of size " + std::to_string(F.size()));
    TorusElement r(F.size());
    for (const auto& [u, cu] : a.terms())
        for (const auto& [v, cv] : b.terms())
            r.add_term(exps_add(u, v), cu * cv * Scalar::a_half(2 * F.kappa(u, v)));
    return r;
}

Monomial weyl_monomial(const Exps& u, const CommutationForm& F) {
    if (u.size() != F.size()) throw std::invalid_argument("weyl: exponent length mismatch");
    return {Scalar::a_half(F.weyl_half_exponent(u)), u};
}

TorusElement weyl(const Exps& u, const CommutationForm& F) {
    return TorusElement(weyl_monomial(u, F));
}

Monomial inverse(const Monomial& m, const CommutationForm& F) {
    const Exps neg = exps_scale(m.exps, -1);
    return {m.coeff.inverse() * Scalar::a_half(-2 * F.kappa(m.exps, neg)), neg};
}

Monomial pow(const Monomial& m, std::int64_t k, const CommutationForm& F) {
    if (k < 0) return pow(inverse(m, F), -k, F);
    Monomial r{Scalar::one(), Exps(F.size(), 0)};
    for (std::int64_t t = 0; t < k; ++t) r = mul(r, m, F);
    return r;
}

std::complex<double> specialize(const TorusElement& a, const CommutationForm& F,
                                const std::vector<std::complex<double>>& assignment,
                                std::complex<double> s) {
    if (assignment.size() != F.size() || a.ngens() != F.size())
        throw std::invalid_argument("specialize: assignment must give one value per generator");
    std::complex<double> acc(0.0, 0.0);
    for (const auto& [u, c] : a.terms()) {
        std::complex<double> v = c.eval(s);
        for (std::size_t i = 0; i < u.size(); ++i)
            if (u[i] != 0) v *= std::pow(assignment[i], static_cast<int>(u[i]));
        acc += v;
    }
    return acc;
}

// ---------------------------------------------------------------- named torus

QuantumTorus::QuantumTorus(CommutationForm form, std::vector<std::string> names)
    : form_(std::move(form)), names_(std::move(names)) {
    if (names_.size() != form_.size())
        throw std::invalid_argument("QuantumTorus: one name per generator required");
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (!index_.emplace(names_[i], i).second)
            throw std::invalid_argument("QuantumTorus: duplicate generator name " + names_[i]);
    }
}

std::optional<std::size_t> QuantumTorus::index_of(std::string_view name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

TorusElement QuantumTorus::pow(const TorusElement& a, std::int64_t k) const {
    if (k < 0) {
        if (!a.is_monomial()) throw std::invalid_argument("negative power of a non-monomial");
        return TorusElement(q3t::pow(a.as_monomial(), k, form_));
    }
    TorusElement r = one();
    for (std::int64_t t = 0; t < k; ++t) r = mul(r, a);
    return r;
}

TorusElement QuantumTorus::commutator(const TorusElement& a, const TorusElement& b) const {
    return mul(a, b) - mul(b, a);
}

namespace {

bool scalar_is_negative_single(const Scalar& c) {
    if (c.terms().size() != 1) return false;
    const auto& g = c.terms().begin()->second;
    return (g.im == 0 && g.re < 0) || (g.re == 0 && g.im < 0);
}

}  // namespace

std::string QuantumTorus::render(const TorusElement& a) const {
    if (a.is_zero()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [u, c] : a.terms()) {
        const bool negative = scalar_is_negative_single(c);
        const Scalar mag = negative ? -c : c;
        std::string mono;
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (u[i] == 0) continue;
            if (!mono.empty()) mono += ' ';
            mono += names_[i];
            if (u[i] != 1) mono += "^" + std::to_string(u[i]);
        }
        std::string coeff = mag.to_string();
        if (mag.terms().size() > 1) coeff = "(" + coeff + ")";
        std::string body;
        if (mono.empty()) {
            body = coeff;
        } else if (mag == Scalar::one()) {
            body = mono;
        } else {
            body = coeff + " * " + mono;
        }
        if (first) {
            out = negative ? "-" + body : body;
        } else {
            out += negative ? " - " : " + ";
            out += body;
        }
        first = false;
    }
    return out;
}

namespace {

// Grammar (products are taken in written order):
//   expr   := ['-'|'+'] term (('+'|'-') term)*
//   term   := factor ([ '*' | '·' ] factor)*
//   factor := atom ['^' exponent]
//   atom   := integer | 'i' | 'A' | identifier | '(' expr ')'
// identifiers: [A-Za-z_][A-Za-z0-9_']*; "A" and "i" are reserved.
class TorusParser {
public:
    TorusParser(std::string_view s, const QuantumTorus& T, const QuantumTorus::Resolver& r)
        : s_(s), T_(T), resolver_(r) {}

    TorusElement parse() {
        TorusElement v = expr();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw std::invalid_argument("expression parse error at offset " + std::to_string(pos_) +
                                    " in '" + std::string(s_) + "': " + why);
    }
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool peek(char c) {
        skip_ws();
        return pos_ < s_.size() && s_[pos_] == c;
    }
    bool peek_middot() {
        skip_ws();
        return pos_ + 1 < s_.size() && static_cast<unsigned char>(s_[pos_]) == 0xC2 &&
               static_cast<unsigned char>(s_[pos_ + 1]) == 0xB7;
    }
    static bool ident_start(char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
    }
    static bool ident_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
    }
    bool at_atom_start() {
        skip_ws();
        if (pos_ >= s_.size()) return false;
        const char c = s_[pos_];
        return std::isdigit(static_cast<unsigned char>(c)) || ident_start(c) || c == '(';
    }

    TorusElement expr() {
        bool negate = false;
        if (peek('-')) {
            ++pos_;
            negate = true;
        } else if (peek('+')) {
            ++pos_;
        }
        TorusElement acc = term();
        if (negate) acc = -acc;
        while (true) {
            if (peek('+')) {
                ++pos_;
                acc += term();
            } else if (peek('-')) {
                ++pos_;
                acc -= term();
            } else {
                break;
            }
        }
        return acc;
    }

    TorusElement term() {
        TorusElement acc = factor();
        while (true) {
            if (peek('*')) {
                ++pos_;
                acc = T_.mul(acc, factor());
            } else if (peek_middot()) {
                pos_ += 2;
                acc = T_.mul(acc, factor());
            } else if (at_atom_start()) {
                acc = T_.mul(acc, factor());
            } else {
                break;
            }
        }
        return acc;
    }

    std::int64_t integer() {
        skip_ws();
        bool neg = false;
        if (pos_ < s_.size() && s_[pos_] == '-') {
            neg = true;
            ++pos_;
        }
        const std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (start == pos_) fail("expected integer");
        const std::int64_t v = std::stoll(std::string(s_.substr(start, pos_ - start)));
        return neg ? -v : v;
    }

    // Exponent doubled: "(3/2)" -> 3, "-2" -> -4.
    std::int64_t half_exponent() {
        skip_ws();
        if (peek('(')) {
            ++pos_;
            const std::int64_t num = integer();
            std::int64_t doubled = 2 * num;
            if (peek('/')) {
                ++pos_;
                const std::int64_t den = integer();
                if (den == 2) {
                    doubled = num;
                } else if (den != 1) {
                    fail("exponent denominator must be 1 or 2");
                }
            }
            if (!peek(')')) fail("expected ')'");
            ++pos_;
            return doubled;
        }
        return 2 * integer();
    }

    TorusElement resolve(const std::string& id) {
        if (resolver_) {
            if (auto v = resolver_(id)) return *v;
        }
        if (auto idx = T_.index_of(id)) return T_.gen(*idx);
        // Juxtaposed scalar letters such as "iA".
        bool scalar_letters = !id.empty();
        for (char c : id) scalar_letters = scalar_letters && (c == 'i' || c == 'A');
        if (scalar_letters) {
            Scalar v = Scalar::one();
            for (char c : id) v *= (c == 'i') ? Scalar::i() : Scalar::a_pow(1);
            return T_.constant(v);
        }
        fail("unknown identifier '" + id + "'");
    }

    TorusElement factor() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (ident_start(c)) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
            const std::string id(s_.substr(start, pos_ - start));
            if (id == "A") {
                std::int64_t n = 2;
                if (peek('^')) {
                    ++pos_;
                    n = half_exponent();
                }
                return T_.constant(Scalar::a_half(n));
            }
            if (id.size() > 1 && !T_.index_of(id) && id.find_first_not_of("iA") == std::string::npos &&
                !(resolver_ && resolver_(id))) {
                // Juxtaposed scalar letters such as "iA^(1/2)": a trailing
                // power binds to the last letter only.
                Scalar prefix = Scalar::one();
                for (std::size_t k = 0; k + 1 < id.size(); ++k)
                    prefix *= (id[k] == 'i') ? Scalar::i() : Scalar::a_pow(1);
                TorusElement last = T_.constant(id.back() == 'i' ? Scalar::i() : Scalar::a_pow(1));
                if (id.back() == 'A' && peek('^')) {
                    ++pos_;
                    last = T_.constant(Scalar::a_half(half_exponent()));
                } else {
                    last = maybe_power(std::move(last));
                }
                return prefix * last;
            }
            TorusElement base = (id == "i") ? T_.constant(Scalar::i()) : resolve(id);
            return maybe_power(std::move(base));
        }
        if (c == '(') {
            ++pos_;
            TorusElement inner = expr();
            if (!peek(')')) fail("expected ')'");
            ++pos_;
            return maybe_power(std::move(inner));
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            Scalar v(GaussianInt(BigInt(std::string(s_.substr(start, pos_ - start))), 0), 0);
            return maybe_power(T_.constant(v));
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    TorusElement maybe_power(TorusElement base) {
        if (!peek('^')) return base;
        ++pos_;
        const std::int64_t doubled = half_exponent();
        if (doubled % 2 != 0) fail("half-integer power of a factor other than A");
        return T_.pow(base, doubled / 2);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    const QuantumTorus& T_;
    const QuantumTorus::Resolver& resolver_;
};

}  // namespace

TorusElement QuantumTorus::parse(std::string_view text, const Resolver& resolver) const {
    return TorusParser(text, *this, resolver).parse();
}

}  // namespace q3t
