#include "selfish_lb/rat.hpp"

#include <cctype>
#include <cmath>

namespace slb {

namespace {

bool is_decimal_integer(std::string_view s) {
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

mpz_class parse_integer(std::string_view s) {
  if (!is_decimal_integer(s)) {
    throw InputError("not a decimal integer: '" + std::string(s) + "'");
  }
  if (s.front() == '+') s.remove_prefix(1);
  return mpz_class(std::string(s), 10);
}

}  // namespace

Rat::Rat(long num, long den) {
  if (den == 0) throw std::domain_error("zero denominator");
  v_ = mpq_class(num, 1);
  v_ /= mpq_class(den, 1);
  v_.canonicalize();
}

Rat Rat::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rat(mpq_class(parse_integer(text)));
  return from_parts(text.substr(0, slash), text.substr(slash + 1));
}

Rat Rat::from_parts(std::string_view num, std::string_view den) {
  mpz_class n = parse_integer(num);
  mpz_class d = parse_integer(den);
  if (d == 0) throw InputError("zero denominator");
  mpq_class q(n, d);
  q.canonicalize();
  return Rat(q);
}

Rat Rat::from_double(double d) {
  if (!std::isfinite(d)) throw InputError("non-finite double");
  mpq_class q;
  q = d;  // exact
  return Rat(q);
}

Rat Rat::pow2(long z) {
  mpz_class p = 1;
  if (z >= 0) {
    mpz_mul_2exp(p.get_mpz_t(), p.get_mpz_t(), static_cast<mp_bitcnt_t>(z));
    return Rat(mpq_class(p));
  }
  mpz_mul_2exp(p.get_mpz_t(), p.get_mpz_t(), static_cast<mp_bitcnt_t>(-z));
  return Rat(mpq_class(mpz_class(1), p));
}

Rat& Rat::operator/=(const Rat& o) {
  if (o.is_zero()) throw std::domain_error("division by zero");
  v_ /= o.v_;
  return *this;
}

long Rat::floor_log2() const {
  if (sign() <= 0) throw std::domain_error("floor_log2 of nonpositive value");
  const long nb = static_cast<long>(mpz_sizeinbase(v_.get_num_mpz_t(), 2));
  const long db = static_cast<long>(mpz_sizeinbase(v_.get_den_mpz_t(), 2));
  // 2^(nb-1) <= num < 2^nb and 2^(db-1) <= den < 2^db, so the answer is
  // nb-db or nb-db-1.
  long z = nb - db;
  if (pow2(z) > *this) --z;
  return z;
}

bool Rat::is_pow2() const {
  if (sign() <= 0) return false;
  return mpz_popcount(v_.get_num_mpz_t()) == 1 && mpz_popcount(v_.get_den_mpz_t()) == 1;
}

std::string Rat::str() const {
  if (is_integer()) return num_str();
  return num_str() + "/" + den_str();
}

std::ostream& operator<<(std::ostream& os, const Rat& r) { return os << r.str(); }

}  // namespace slb
