#include "hornerfit/rational.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace hornerfit {

namespace {

enum class RoundDir { nearest_even, down, up };

// floor(log2 q) for q > 0.
long floor_log2(const BigRational& q) {
  const mpz_class& num = q.get_num();
  const mpz_class& den = q.get_den();
  long e = static_cast<long>(mpz_sizeinbase(num.get_mpz_t(), 2)) -
           static_cast<long>(mpz_sizeinbase(den.get_mpz_t(), 2));
  // 2^e <= q < 2^(e+2) at this point; settle which.
  mpz_class lhs = num, rhs = den;
  if (e >= 0) rhs <<= e; else lhs <<= -e;
  if (lhs < rhs) --e;
  return e;
}

F32 round_with(const BigRational& q, RoundDir dir) {
  if (q == 0) return F32::from_float(0.0f);
  BigRational mag = abs(q);
  const long e = floor_log2(mag);
  const long quantum = std::max(e, -126L) - 23;
  BigRational t = q;
  if (quantum >= 0) t /= pow2(quantum); else t *= pow2(-quantum);

  mpz_class n;
  mpz_fdiv_q(n.get_mpz_t(), t.get_num_mpz_t(), t.get_den_mpz_t());
  BigRational frac = t - BigRational(n);
  switch (dir) {
    case RoundDir::down:
      break;
    case RoundDir::up:
      if (frac != 0) n += 1;
      break;
    case RoundDir::nearest_even: {
      const int c = cmp(frac, BigRational(1, 2));
      if (c > 0 || (c == 0 && mpz_odd_p(n.get_mpz_t()))) n += 1;
      break;
    }
  }
  // |n| <= 2^24, so n * 2^quantum is a binary32 unless it overflows.
  const long ni = n.get_si();
  if (quantum > 104 || (quantum == 104 && std::labs(ni) >= (1L << 24))) {
    throw std::out_of_range("rational value outside the finite binary32 range");
  }
  return F32::from_float(std::ldexp(static_cast<float>(ni), static_cast<int>(quantum)));
}

}  // namespace

BigRational make_rational(long num, long den) {
  BigRational q(num, den);
  q.canonicalize();
  return q;
}

BigRational pow2(long e) {
  BigRational q(1);
  if (e >= 0) mpz_mul_2exp(q.get_num_mpz_t(), q.get_num_mpz_t(), static_cast<mp_bitcnt_t>(e));
  else mpz_mul_2exp(q.get_den_mpz_t(), q.get_den_mpz_t(), static_cast<mp_bitcnt_t>(-e));
  return q;
}

BigRational rational_of_f32(F32 x) {
  if (!x.is_finite()) throw std::invalid_argument("rational_of_f32: non-finite value");
  const std::uint32_t mag = x.magnitude_bits();
  const std::uint32_t biased = mag >> 23;
  std::uint32_t mant = mag & 0x7fffffu;
  long exp = 0;
  if (biased == 0) {
    exp = -149;
  } else {
    mant |= 0x800000u;
    exp = static_cast<long>(biased) - 150;
  }
  BigRational q(static_cast<unsigned long>(mant));
  q *= pow2(exp);
  if (x.sign()) q = -q;
  return q;
}

F32 round_to_f32(const BigRational& q) { return round_with(q, RoundDir::nearest_even); }

F32 floor_f32(const BigRational& q) {
  if (q < rational_of_f32(kMinFinite)) throw std::out_of_range("floor_f32: below -max");
  if (q > rational_of_f32(kMaxFinite)) return kMaxFinite;
  return round_with(q, RoundDir::down);
}

F32 ceil_f32(const BigRational& q) {
  if (q > rational_of_f32(kMaxFinite)) throw std::out_of_range("ceil_f32: above max");
  if (q < rational_of_f32(kMinFinite)) return kMinFinite;
  return round_with(q, RoundDir::up);
}

bool is_dyadic(const BigRational& q) {
  const mpz_class& den = q.get_den();
  return mpz_popcount(den.get_mpz_t()) == 1;
}

std::string exact_string(const BigRational& q) { return q.get_str(); }

std::string decimal_string(const BigRational& q) {
  if (!is_dyadic(q)) return q.get_str();
  const long k = static_cast<long>(mpz_scan1(q.get_den_mpz_t(), 0));
  if (k == 0) return q.get_num().get_str();
  mpz_class five;
  mpz_ui_pow_ui(five.get_mpz_t(), 5, static_cast<unsigned long>(k));
  mpz_class scaled = abs(q.get_num()) * five;
  std::string digits = scaled.get_str();
  if (digits.size() <= static_cast<std::size_t>(k)) {
    digits.insert(0, static_cast<std::size_t>(k) + 1 - digits.size(), '0');
  }
  digits.insert(digits.size() - static_cast<std::size_t>(k), ".");
  return (q < 0 ? "-" : "") + digits;
}

double to_double(const BigRational& q) { return q.get_d(); }

std::string approx_string(const BigRational& q, int digits) {
  mpf_class f(q, 256);
  mp_exp_t exp = 0;
  std::string mant = f.get_str(exp, 10, static_cast<std::size_t>(digits));
  if (mant.empty()) return "0";
  const bool neg = mant[0] == '-';
  if (neg) mant.erase(0, 1);
  std::string out = neg ? "-" : "";
  // value = 0.mant * 10^exp
  if (exp > 0 && exp <= 12) {
    if (mant.size() < static_cast<std::size_t>(exp)) mant.append(static_cast<std::size_t>(exp) - mant.size(), '0');
    out += mant.substr(0, static_cast<std::size_t>(exp));
    if (mant.size() > static_cast<std::size_t>(exp)) out += "." + mant.substr(static_cast<std::size_t>(exp));
  } else if (exp <= 0 && exp > -6) {
    out += "0." + std::string(static_cast<std::size_t>(-exp), '0') + mant;
  } else {
    out += mant.substr(0, 1);
    if (mant.size() > 1) out += "." + mant.substr(1);
    out += "e" + std::to_string(exp - 1);
  }
  return out;
}

BigRational parse_rational(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(0, 1);
  if (s.empty()) throw std::invalid_argument("empty rational");
  const bool neg = s[0] == '-';
  std::string body = (s[0] == '-' || s[0] == '+') ? s.substr(1) : s;
  if (body.size() > 1 && body[0] == '0' && (body[1] == 'x' || body[1] == 'X')) {
    return rational_of_f32(parse_hexfloat(s));
  }
  BigRational q;
  if (const auto slash = body.find('/'); slash != std::string::npos) {
    mpz_class num, den;
    if (num.set_str(body.substr(0, slash), 10) != 0 || den.set_str(body.substr(slash + 1), 10) != 0 ||
        den == 0) {
      throw std::invalid_argument("bad rational: " + s);
    }
    q = BigRational(num, den);
    q.canonicalize();
  } else {
    const auto dot = body.find('.');
    std::string whole = body.substr(0, dot);
    std::string frac = dot == std::string::npos ? "" : body.substr(dot + 1);
    if (whole.empty()) whole = "0";
    mpz_class num;
    if (num.set_str(whole + frac, 10) != 0) throw std::invalid_argument("bad rational: " + s);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac.size());
    q = BigRational(num, den);
    q.canonicalize();
  }
  return neg ? BigRational(-q) : q;
}

}  // namespace hornerfit
