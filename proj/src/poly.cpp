#include "mmp_nlp/poly.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <utility>

#include <fmt/format.h>

namespace mmp_nlp {

namespace {

double ipow(double base, unsigned exponent) {
  double result = 1.0;
  for (unsigned i = 0; i < exponent; ++i) result *= base;
  return result;
}

ExponentMap multiply_exponents(const ExponentMap& a, const ExponentMap& b) {
  ExponentMap out = a;
  for (const auto& [var, deg] : b) out[var] += deg;
  return out;
}

// Shortest fixed-notation text that round-trips through from_chars.
std::string format_coefficient(double value) {
  std::string buffer(400, '\0');
  auto [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value,
                                 std::chars_format::fixed);
  if (ec != std::errc{}) throw std::runtime_error("coefficient cannot be formatted");
  buffer.resize(static_cast<std::size_t>(end - buffer.data()));
  return buffer;
}

class Parser {
 public:
  Parser(std::string_view text, std::size_t dimension) : text_(text), dimension_(dimension) {}

  Polynomial parse() {
    skip_space();
    if (at_end()) throw ParseError(pos_, "empty expression");
    Polynomial result = expression();
    skip_space();
    if (!at_end()) throw ParseError(pos_, fmt::format("unexpected character '{}'", text_[pos_]));
    return result;
  }

 private:
  static constexpr unsigned kMaxExponent = 255;

  [[nodiscard]] bool at_end() const { return pos_ >= text_.size(); }
  [[nodiscard]] char peek() const { return at_end() ? '\0' : text_[pos_]; }

  void skip_space() {
    while (!at_end() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                         text_[pos_] == '\r'))
      ++pos_;
  }

  static bool is_digit(char c) { return c >= '0' && c <= '9'; }

  Polynomial expression() {
    Polynomial result = term();
    for (;;) {
      skip_space();
      const char c = peek();
      if (c != '+' && c != '-') return result;
      ++pos_;
      Polynomial rhs = term();
      result = (c == '+') ? result + rhs : result - rhs;
    }
  }

  Polynomial term() {
    Polynomial result = factor();
    for (;;) {
      skip_space();
      if (peek() != '*') return result;
      ++pos_;
      result = result * factor();
    }
  }

  Polynomial factor() {
    skip_space();
    const char c = peek();
    if (c == '-') {
      ++pos_;
      return -factor();
    }
    if (c == '+') {
      ++pos_;
      return factor();
    }
    return power();
  }

  Polynomial power() {
    Polynomial base = primary();
    skip_space();
    if (peek() != '^') return base;
    ++pos_;
    skip_space();
    const std::size_t start = pos_;
    if (peek() == '-') throw ParseError(start, "exponent must be a nonnegative integer");
    if (!is_digit(peek())) throw ParseError(start, "expected integer exponent after '^'");
    unsigned exponent = 0;
    while (is_digit(peek())) {
      exponent = exponent * 10 + static_cast<unsigned>(peek() - '0');
      if (exponent > kMaxExponent)
        throw ParseError(start, fmt::format("exponent exceeds {}", kMaxExponent));
      ++pos_;
    }
    if (peek() == '.') throw ParseError(start, "exponent must be a nonnegative integer");
    return base.pow(exponent);
  }

  Polynomial primary() {
    skip_space();
    if (at_end()) throw ParseError(pos_, "unexpected end of expression");
    const char c = peek();
    if (c == '(') {
      ++pos_;
      Polynomial inner = expression();
      skip_space();
      if (peek() != ')') throw ParseError(pos_, "expected ')'");
      ++pos_;
      return inner;
    }
    if (c == 'x') return variable();
    if (is_digit(c) || c == '.') return number();
    throw ParseError(pos_, fmt::format("unexpected character '{}'", c));
  }

  Polynomial variable() {
    const std::size_t start = pos_;
    ++pos_;  // 'x'
    if (!is_digit(peek())) throw ParseError(start, "variable name must be x<index>");
    std::size_t index = 0;
    while (is_digit(peek())) {
      index = index * 10 + static_cast<std::size_t>(peek() - '0');
      if (index > dimension_ + 1000000) break;
      ++pos_;
    }
    while (is_digit(peek())) ++pos_;
    if (index == 0 || index > dimension_)
      throw ParseError(start, fmt::format("variable index {} out of range 1..{}",
                                          text_.substr(start + 1, pos_ - start - 1), dimension_));
    return Polynomial::variable(dimension_, index - 1);
  }

  Polynomial number() {
    const std::size_t start = pos_;
    while (is_digit(peek())) ++pos_;
    if (peek() == '.') {
      ++pos_;
      while (is_digit(peek())) ++pos_;
    }
    const std::string_view literal = text_.substr(start, pos_ - start);
    if (literal == ".") throw ParseError(start, "malformed number");
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(literal.data(), literal.data() + literal.size(), value,
                                     std::chars_format::fixed);
    if (ec != std::errc{} || ptr != literal.data() + literal.size())
      throw ParseError(start, "malformed number");
    return Polynomial::constant(dimension_, value);
  }

  std::string_view text_;
  std::size_t dimension_;
  std::size_t pos_{0};
};

}  // namespace

unsigned Monomial::total_degree() const {
  unsigned d = 0;
  for (const auto& [var, deg] : exponents) d += deg;
  return d;
}

bool grlex_precedes(const ExponentMap& a, const ExponentMap& b) {
  unsigned da = 0;
  unsigned db = 0;
  for (const auto& e : a) da += e.second;
  for (const auto& e : b) db += e.second;
  if (da != db) return da > db;
  // Lexicographic on dense exponent vectors: the first variable where the
  // degrees differ decides, larger degree first.
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first != ib->first) return ia->first < ib->first;
    if (ia->second != ib->second) return ia->second > ib->second;
    ++ia;
    ++ib;
  }
  return ia != a.end() && ib == b.end();
}

ParseError::ParseError(std::size_t offset, const std::string& message)
    : std::runtime_error(fmt::format("offset {}: {}", offset, message)), offset_(offset) {}

Polynomial::Polynomial(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw std::invalid_argument("polynomial dimension must be positive");
}

Polynomial::Polynomial(std::size_t dimension, std::vector<Monomial> terms)
    : dimension_(dimension), terms_(std::move(terms)) {
  if (dimension == 0) throw std::invalid_argument("polynomial dimension must be positive");
  for (const Monomial& t : terms_) {
    for (const auto& [var, deg] : t.exponents) {
      if (var >= dimension_)
        throw std::invalid_argument(fmt::format("variable index {} out of range", var));
    }
  }
  canonicalize();
}

Polynomial Polynomial::constant(std::size_t dimension, double value) {
  return Polynomial(dimension, {Monomial{value, {}}});
}

Polynomial Polynomial::variable(std::size_t dimension, std::size_t index) {
  return Polynomial(dimension, {Monomial{1.0, {{index, 1u}}}});
}

void Polynomial::canonicalize() {
  for (Monomial& t : terms_) {
    std::erase_if(t.exponents, [](const auto& e) { return e.second == 0; });
  }
  std::stable_sort(terms_.begin(), terms_.end(), [](const Monomial& a, const Monomial& b) {
    return grlex_precedes(a.exponents, b.exponents);
  });
  std::vector<Monomial> merged;
  merged.reserve(terms_.size());
  for (Monomial& t : terms_) {
    if (!merged.empty() && merged.back().exponents == t.exponents) {
      merged.back().coefficient += t.coefficient;
    } else {
      merged.push_back(std::move(t));
    }
  }
  std::erase_if(merged, [](const Monomial& t) { return t.coefficient == 0.0; });
  terms_ = std::move(merged);
}

unsigned Polynomial::degree() const {
  unsigned d = 0;
  for (const Monomial& t : terms_) d = std::max(d, t.total_degree());
  return d;
}

double Polynomial::operator()(const Vector& x) const { return eval_poly(*this, x); }

Polynomial Polynomial::derivative(std::size_t index) const {
  if (index >= dimension_) throw std::invalid_argument("derivative index out of range");
  std::vector<Monomial> out;
  for (const Monomial& t : terms_) {
    auto it = t.exponents.find(index);
    if (it == t.exponents.end()) continue;
    Monomial d{t.coefficient * static_cast<double>(it->second), t.exponents};
    if (--d.exponents[index] == 0) d.exponents.erase(index);
    out.push_back(std::move(d));
  }
  return Polynomial(dimension_, std::move(out));
}

Polynomial Polynomial::operator-() const { return -1.0 * *this; }

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  if (a.dimension_ != b.dimension_) throw std::invalid_argument("polynomial dimension mismatch");
  std::vector<Monomial> terms = a.terms_;
  terms.insert(terms.end(), b.terms_.begin(), b.terms_.end());
  return Polynomial(a.dimension_, std::move(terms));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.dimension_ != b.dimension_) throw std::invalid_argument("polynomial dimension mismatch");
  std::vector<Monomial> terms;
  terms.reserve(a.terms_.size() * b.terms_.size());
  for (const Monomial& s : a.terms_) {
    for (const Monomial& t : b.terms_) {
      terms.push_back({s.coefficient * t.coefficient, multiply_exponents(s.exponents, t.exponents)});
    }
  }
  return Polynomial(a.dimension_, std::move(terms));
}

Polynomial operator*(double s, const Polynomial& p) {
  std::vector<Monomial> terms = p.terms_;
  for (Monomial& t : terms) t.coefficient *= s;
  return Polynomial(p.dimension_, std::move(terms));
}

Polynomial Polynomial::pow(unsigned exponent) const {
  Polynomial result = constant(dimension_, 1.0);
  for (unsigned i = 0; i < exponent; ++i) result = result * *this;
  return result;
}

bool operator==(const Polynomial& a, const Polynomial& b) {
  if (a.dimension_ != b.dimension_ || a.terms_.size() != b.terms_.size()) return false;
  for (std::size_t i = 0; i < a.terms_.size(); ++i) {
    if (a.terms_[i].coefficient != b.terms_[i].coefficient ||
        a.terms_[i].exponents != b.terms_[i].exponents)
      return false;
  }
  return true;
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const Monomial& t = terms_[i];
    const bool negative = std::signbit(t.coefficient);
    if (i == 0) {
      if (negative) out += "-";
    } else {
      out += negative ? " - " : " + ";
    }
    const double magnitude = std::fabs(t.coefficient);
    bool need_star = false;
    if (magnitude != 1.0 || t.exponents.empty()) {
      out += format_coefficient(magnitude);
      need_star = true;
    }
    for (const auto& [var, deg] : t.exponents) {
      if (need_star) out += "*";
      out += fmt::format("x{}", var + 1);
      if (deg != 1) out += fmt::format("^{}", deg);
      need_star = true;
    }
  }
  return out;
}

Polynomial parse_polynomial(std::string_view text, std::size_t dimension) {
  if (dimension == 0) throw std::invalid_argument("dimension must be positive");
  return Parser(text, dimension).parse();
}

double eval_poly(const Polynomial& p, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != p.dimension())
    throw std::invalid_argument(
        fmt::format("point has dimension {}, polynomial has {}", x.size(), p.dimension()));
  double sum = 0.0;
  for (const Monomial& t : p.terms()) {
    double value = t.coefficient;
    for (const auto& [var, deg] : t.exponents) value *= ipow(x[static_cast<Index>(var)], deg);
    sum += value;
  }
  return sum;
}

std::vector<Polynomial> grad_poly(const Polynomial& p) {
  std::vector<Polynomial> out;
  out.reserve(p.dimension());
  for (std::size_t i = 0; i < p.dimension(); ++i) out.push_back(p.derivative(i));
  return out;
}

Vector eval_gradient(const std::vector<Polynomial>& gradient, const Vector& x) {
  Vector g(static_cast<Index>(gradient.size()));
  for (std::size_t i = 0; i < gradient.size(); ++i) g[static_cast<Index>(i)] = eval_poly(gradient[i], x);
  return g;
}

AxisBox AxisBox::symmetric(std::size_t dimension, double half_width) {
  const auto n = static_cast<Index>(dimension);
  return AxisBox{Vector::Constant(n, -half_width), Vector::Constant(n, half_width)};
}

double lipschitz_grad_bound(const Polynomial& p, const AxisBox& box) {
  const auto n = static_cast<Index>(p.dimension());
  if (box.lower.size() != n || box.upper.size() != n)
    throw std::invalid_argument("box dimension does not match polynomial");
  if (!box.lower.allFinite() || !box.upper.allFinite())
    throw std::invalid_argument("Lipschitz bound requires a box with finite bounds");
  if ((box.lower.array() > box.upper.array()).any())
    throw std::invalid_argument("box lower bound exceeds upper bound");

  const Vector radius = box.lower.cwiseAbs().cwiseMax(box.upper.cwiseAbs());
  auto entry_bound = [&](const Polynomial& q) {
    double bound = 0.0;
    for (const Monomial& t : q.terms()) {
      double m = std::fabs(t.coefficient);
      for (const auto& [var, deg] : t.exponents) m *= ipow(radius[static_cast<Index>(var)], deg);
      bound += m;
    }
    return bound;
  };

  Matrix bounds = Matrix::Zero(n, n);
  const std::vector<Polynomial> gradient = grad_poly(p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      const double b = entry_bound(gradient[static_cast<std::size_t>(i)].derivative(static_cast<std::size_t>(j)));
      bounds(i, j) = b;
      bounds(j, i) = b;
    }
  }
  const double gershgorin = n > 0 ? bounds.rowwise().sum().maxCoeff() : 0.0;
  return gershgorin > 0.0 ? gershgorin : kLipschitzFloor;
}

}  // namespace mmp_nlp
