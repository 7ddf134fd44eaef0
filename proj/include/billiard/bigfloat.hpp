#pragma once

#include <mpfr.h>

#include <cmath>
#include <string>
#include <utility>

namespace billiard {

// RAII value type over mpfr_t. Precision is fixed per instance; binary
// operations produce the wider precision of the operands.
class BigFloat {
public:
    explicit BigFloat(mpfr_prec_t prec = 256) { mpfr_init2(v_, prec); mpfr_set_zero(v_, 1); }
    BigFloat(double x, mpfr_prec_t prec) { mpfr_init2(v_, prec); mpfr_set_d(v_, x, MPFR_RNDN); }
    BigFloat(const BigFloat& o) { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
    BigFloat(BigFloat&& o) noexcept {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_swap(v_, o.v_);
    }
    BigFloat& operator=(const BigFloat& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    BigFloat& operator=(BigFloat&& o) noexcept {
        if (this != &o) mpfr_swap(v_, o.v_);
        return *this;
    }
    ~BigFloat() { mpfr_clear(v_); }

    static mpfr_prec_t prec_for_digits(int digits) {
        return static_cast<mpfr_prec_t>(digits * 3.3219280948873623 + 24);
    }

    mpfr_prec_t prec() const { return mpfr_get_prec(v_); }
    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
    int sign() const { return mpfr_sgn(v_); }

    mpfr_ptr raw() { return v_; }
    mpfr_srcptr raw() const { return v_; }

#define BILLIARD_BF_BINOP(op, fn)                                                  \
    friend BigFloat operator op(const BigFloat& a, const BigFloat& b) {            \
        BigFloat r(std::max(a.prec(), b.prec()));                                  \
        fn(r.v_, a.v_, b.v_, MPFR_RNDN);                                           \
        return r;                                                                  \
    }                                                                              \
    friend BigFloat operator op(const BigFloat& a, double b) {                     \
        BigFloat r(a.prec());                                                      \
        fn##_d(r.v_, a.v_, b, MPFR_RNDN);                                          \
        return r;                                                                  \
    }

    BILLIARD_BF_BINOP(+, mpfr_add)
    BILLIARD_BF_BINOP(-, mpfr_sub)
    BILLIARD_BF_BINOP(*, mpfr_mul)
    BILLIARD_BF_BINOP(/, mpfr_div)
#undef BILLIARD_BF_BINOP

    friend BigFloat operator*(double a, const BigFloat& b) { return b * a; }
    friend BigFloat operator+(double a, const BigFloat& b) { return b + a; }
    friend BigFloat operator-(double a, const BigFloat& b) {
        BigFloat r(b.prec());
        mpfr_d_sub(r.v_, a, b.v_, MPFR_RNDN);
        return r;
    }
    friend BigFloat operator/(double a, const BigFloat& b) {
        BigFloat r(b.prec());
        mpfr_d_div(r.v_, a, b.v_, MPFR_RNDN);
        return r;
    }
    friend BigFloat operator-(const BigFloat& a) {
        BigFloat r(a.prec());
        mpfr_neg(r.v_, a.v_, MPFR_RNDN);
        return r;
    }

    friend bool operator<(const BigFloat& a, const BigFloat& b) { return mpfr_cmp(a.v_, b.v_) < 0; }
    friend bool operator>(const BigFloat& a, const BigFloat& b) { return mpfr_cmp(a.v_, b.v_) > 0; }
    friend bool operator<=(const BigFloat& a, const BigFloat& b) { return mpfr_cmp(a.v_, b.v_) <= 0; }
    friend bool operator>=(const BigFloat& a, const BigFloat& b) { return mpfr_cmp(a.v_, b.v_) >= 0; }
    friend bool operator<(const BigFloat& a, double b) { return mpfr_cmp_d(a.v_, b) < 0; }
    friend bool operator>(const BigFloat& a, double b) { return mpfr_cmp_d(a.v_, b) > 0; }
    friend bool operator<=(const BigFloat& a, double b) { return mpfr_cmp_d(a.v_, b) <= 0; }
    friend bool operator>=(const BigFloat& a, double b) { return mpfr_cmp_d(a.v_, b) >= 0; }

#define BILLIARD_BF_FN(name, fn)                    \
    friend BigFloat name(const BigFloat& a) {       \
        BigFloat r(a.prec());                       \
        fn(r.v_, a.v_, MPFR_RNDN);                  \
        return r;                                   \
    }

    BILLIARD_BF_FN(sqrt, mpfr_sqrt)
    BILLIARD_BF_FN(sin, mpfr_sin)
    BILLIARD_BF_FN(cos, mpfr_cos)
    BILLIARD_BF_FN(abs, mpfr_abs)
    BILLIARD_BF_FN(log, mpfr_log)
    BILLIARD_BF_FN(exp, mpfr_exp)
    BILLIARD_BF_FN(asin, mpfr_asin)
    BILLIARD_BF_FN(acos, mpfr_acos)
#undef BILLIARD_BF_FN

    friend BigFloat atan2(const BigFloat& y, const BigFloat& x) {
        BigFloat r(std::max(y.prec(), x.prec()));
        mpfr_atan2(r.v_, y.v_, x.v_, MPFR_RNDN);
        return r;
    }
    friend BigFloat pow(const BigFloat& a, const BigFloat& b) {
        BigFloat r(std::max(a.prec(), b.prec()));
        mpfr_pow(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }
    friend BigFloat pow_int(const BigFloat& a, long n) {
        BigFloat r(a.prec());
        mpfr_pow_si(r.v_, a.v_, n, MPFR_RNDN);
        return r;
    }
    friend BigFloat hypot(const BigFloat& a, const BigFloat& b) {
        BigFloat r(std::max(a.prec(), b.prec()));
        mpfr_hypot(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }
    static BigFloat pi(mpfr_prec_t prec) {
        BigFloat r(prec);
        mpfr_const_pi(r.raw(), MPFR_RNDN);
        return r;
    }

private:
    mpfr_t v_;
};

} // namespace billiard
