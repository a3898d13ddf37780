#include "q3t/scalar.hpp"

#include <cctype>
#include <stdexcept>

namespace q3t {

bool GaussianInt::is_unit() const {
    return (im == 0 && (re == 1 || re == -1)) || (re == 0 && (im == 1 || im == -1));
}

std::complex<double> GaussianInt::to_complex() const {
    return {re.convert_to<double>(), im.convert_to<double>()};
}

std::string to_string(const GaussianInt& g) {
    if (g.im == 0) return g.re.str();
    std::string imag;
    if (g.im == 1) {
        imag = "i";
    } else if (g.im == -1) {
        imag = "-i";
    } else {
        imag = g.im.str() + "i";
    }
    if (g.re == 0) return imag;
    if (g.im > 0) return "(" + g.re.str() + "+" + imag + ")";
    return "(" + g.re.str() + imag + ")";
}

std::string a_power_string(std::int64_t n) {
    if (n == 0) return "";
    if (n % 2 != 0) return "A^(" + std::to_string(n) + "/2)";
    const std::int64_t k = n / 2;
    if (k == 1) return "A";
    return "A^" + std::to_string(k);
}

GaussianHalfLaurent::GaussianHalfLaurent(long long c) {
    add_term(0, GaussianInt(c));
}

GaussianHalfLaurent::GaussianHalfLaurent(GaussianInt c, std::int64_t half_exp) {
    add_term(half_exp, c);
}

GaussianHalfLaurent GaussianHalfLaurent::from_phase(std::int64_t m, std::int64_t n_half) {
    static const GaussianInt powers_of_i[4] = {GaussianInt(1, 0), GaussianInt(0, 1),
                                               GaussianInt(-1, 0), GaussianInt(0, -1)};
    const auto r = static_cast<std::size_t>(((m % 4) + 4) % 4);
    return {powers_of_i[r], 2 * m + n_half};
}

void GaussianHalfLaurent::add_term(std::int64_t n, const GaussianInt& c) {
    if (c.is_zero()) return;
    auto [it, inserted] = terms_.try_emplace(n, c);
    if (!inserted) {
        it->second = it->second + c;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

bool GaussianHalfLaurent::is_unit() const {
    return terms_.size() == 1 && terms_.begin()->second.is_unit();
}

GaussianHalfLaurent GaussianHalfLaurent::inverse() const {
    if (!is_unit()) throw std::domain_error("inverse: scalar " + to_string() + " is not a unit");
    const auto& [n, c] = *terms_.begin();
    return {c.conj(), -n};  // units satisfy u^{-1} = conj(u)
}

std::complex<double> GaussianHalfLaurent::eval(std::complex<double> s) const {
    if (s == std::complex<double>(0.0, 0.0)) throw std::domain_error("eval: A^(1/2) = 0");
    std::complex<double> acc(0.0, 0.0);
    for (const auto& [n, c] : terms_) acc += c.to_complex() * std::pow(s, static_cast<int>(n));
    return acc;
}

GaussianHalfLaurent& GaussianHalfLaurent::operator+=(const GaussianHalfLaurent& o) {
    for (const auto& [n, c] : o.terms_) add_term(n, c);
    return *this;
}

GaussianHalfLaurent& GaussianHalfLaurent::operator-=(const GaussianHalfLaurent& o) {
    for (const auto& [n, c] : o.terms_) add_term(n, -c);
    return *this;
}

GaussianHalfLaurent GaussianHalfLaurent::operator-() const {
    GaussianHalfLaurent r;
    for (const auto& [n, c] : terms_) r.terms_.emplace(n, -c);
    return r;
}

GaussianHalfLaurent operator*(const GaussianHalfLaurent& a, const GaussianHalfLaurent& b) {
    GaussianHalfLaurent r;
    for (const auto& [na, ca] : a.terms_)
        for (const auto& [nb, cb] : b.terms_) r.add_term(na + nb, ca * cb);
    return r;
}

GaussianHalfLaurent& GaussianHalfLaurent::operator*=(const GaussianHalfLaurent& o) {
    *this = *this * o;
    return *this;
}

GaussianHalfLaurent GaussianHalfLaurent::pow(std::int64_t k) const {
    if (k < 0) return inverse().pow(-k);
    GaussianHalfLaurent result = one();
    GaussianHalfLaurent base = *this;
    while (k > 0) {
        if (k & 1) result *= base;
        k >>= 1;
        if (k > 0) base *= base;
    }
    return result;
}

std::string GaussianHalfLaurent::to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [n, c] : terms_) {
        // A term is "negative" when it is a negative real or negative imaginary multiple.
        const bool negative = (c.im == 0 && c.re < 0) || (c.re == 0 && c.im < 0);
        const GaussianInt mag = negative ? -c : c;
        const std::string apart = a_power_string(n);
        std::string body;
        if (mag == GaussianInt(1) && !apart.empty()) {
            body = apart;
        } else {
            body = q3t::to_string(mag) + apart;
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

// Recursive-descent parser over the scalar grammar:
//   expr   := ['-'] term (('+'|'-') term)*
//   term   := factor (['*'] factor)*        (juxtaposition multiplies)
//   factor := atom ['^' exponent]
//   atom   := integer | 'i' | 'A' | '(' expr ')'
// 'A' accepts half-integer exponents "(p/2)"; other atoms take integers.
class ScalarParser {
public:
    explicit ScalarParser(std::string_view s) : s_(s) {}

    Scalar parse() {
        Scalar v = expr();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected character");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw std::invalid_argument("scalar parse error at offset " + std::to_string(pos_) +
                                    " in '" + std::string(s_) + "': " + why);
    }
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool peek(char c) {
        skip_ws();
        return pos_ < s_.size() && s_[pos_] == c;
    }
    bool at_atom_start() {
        skip_ws();
        if (pos_ >= s_.size()) return false;
        const char c = s_[pos_];
        return std::isdigit(static_cast<unsigned char>(c)) || c == 'i' || c == 'A' || c == '(';
    }

    Scalar expr() {
        Scalar acc;
        bool negate = false;
        if (peek('-')) {
            ++pos_;
            negate = true;
        } else if (peek('+')) {
            ++pos_;
        }
        Scalar t = term();
        acc = negate ? -t : t;
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

    Scalar term() {
        Scalar acc = factor();
        while (true) {
            if (peek('*')) {
                ++pos_;
                acc *= factor();
            } else if (at_atom_start()) {
                acc *= factor();
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

    // Returns the exponent doubled (so "(3/2)" -> 3, "2" -> 4).
    std::int64_t half_exponent() {
        skip_ws();
        if (peek('(')) {
            ++pos_;
            const std::int64_t num = integer();
            std::int64_t doubled = 2 * num;
            if (peek('/')) {
                ++pos_;
                const std::int64_t den = integer();
                if (den == 1) {
                    doubled = 2 * num;
                } else if (den == 2) {
                    doubled = num;
                } else {
                    fail("exponent denominator must be 1 or 2");
                }
            }
            if (!peek(')')) fail("expected ')'");
            ++pos_;
            return doubled;
        }
        return 2 * integer();
    }

    Scalar factor() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (c == 'A') {
            ++pos_;
            std::int64_t n = 2;
            if (peek('^')) {
                ++pos_;
                n = half_exponent();
            }
            return Scalar::a_half(n);
        }
        Scalar base;
        if (c == 'i') {
            ++pos_;
            base = Scalar::i();
        } else if (c == '(') {
            ++pos_;
            base = expr();
            if (!peek(')')) fail("expected ')'");
            ++pos_;
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            base = Scalar(GaussianInt(BigInt(std::string(s_.substr(start, pos_ - start))), 0), 0);
        } else {
            fail(std::string("unexpected character '") + c + "'");
        }
        if (peek('^')) {
            ++pos_;
            const std::int64_t doubled = half_exponent();
            if (doubled % 2 != 0) fail("half-integer power of a non-A factor");
            base = base.pow(doubled / 2);
        }
        return base;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace

GaussianHalfLaurent GaussianHalfLaurent::parse(std::string_view text) {
    return ScalarParser(text).parse();
}

}  // namespace q3t
