// Reference table generator for E_{alpha,beta}(-x), written directly against
// the MPFR C API.
//
// Every value is computed with enough working bits to absorb the
// cancellation of the alternating power series. When that would need more
// than kMaxDigits decimal digits, the large-argument expansion is summed
// instead, and accepted only when its terms fall below 1e-60 relative to the
// sum before they start to grow.
//
// Output rows: alpha beta x value (50 significant digits).

#include <mpfr.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kMaxDigits = 1500;

class Real {
public:
    explicit Real(mpfr_prec_t bits) { mpfr_init2(v_, bits); mpfr_set_zero(v_, 1); }
    Real(const Real& o) { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
    Real& operator=(const Real& o) { mpfr_set(v_, o.v_, MPFR_RNDN); return *this; }
    ~Real() { mpfr_clear(v_); }
    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }

private:
    mpfr_t v_;
};

struct Rational {
    long p = 0, q = 0;
};

Rational rational_of(double a) {
    for (long q = 1; q <= 1000; ++q) {
        const double p = std::round(a * q);
        if (std::abs(p / q - a) < 1e-14) return {static_cast<long>(p), q};
    }
    return {};
}

double log10_abs_rgamma(double y) {
    if (y <= 0 && y == std::floor(y)) return -INFINITY;
    if (y > 0) return -std::lgamma(y) / std::log(10.0);
    return (std::lgamma(1 - y) + std::log(std::abs(std::sin(M_PI * y))) - std::log(M_PI)) /
           std::log(10.0);
}

double series_max_term_log10(double a, double b, double x) {
    double best = -INFINITY;
    const double lx = std::log10(x);
    for (long k = 0; k < 20000000; ++k) {
        const double t = k * lx + log10_abs_rgamma(a * k + b);
        best = std::max(best, t);
        if (a * k + b > 10 && t < best - 80) break;
    }
    return best;
}

mpfr_prec_t bits_for(int digits) { return static_cast<mpfr_prec_t>(digits * 3.3219280948873623) + 16; }

// alpha = p/q exactly; beta = alpha_multiple * alpha + offset.
struct Params {
    Rational r;
    int alpha_multiple;
    long offset;
};

void set_alpha(mpfr_ptr out, const Rational& r) {
    mpfr_set_si(out, r.p, MPFR_RNDN);
    mpfr_div_si(out, out, r.q, MPFR_RNDN);
}

void set_beta(mpfr_ptr out, const Params& P, mpfr_srcptr alpha) {
    mpfr_mul_si(out, alpha, P.alpha_multiple, MPFR_RNDN);
    mpfr_add_si(out, out, P.offset, MPFR_RNDN);
}

Real series(const Params& P, double x, mpfr_prec_t bits) {
    Real a(bits), b(bits), xm(bits), xk(bits), sum(bits), arg(bits), g(bits), t(bits), at(bits),
        peak(bits), tiny(bits), tmp(bits);
    set_alpha(a.get(), P.r);
    set_beta(b.get(), P, a.get());
    mpfr_set_d(xm.get(), x, MPFR_RNDN);
    mpfr_set_ui(xk.get(), 1, MPFR_RNDN);
    mpfr_set_ui(tiny.get(), 2, MPFR_RNDN);
    mpfr_pow_si(tiny.get(), tiny.get(), -static_cast<long>(bits) + 20, MPFR_RNDN);
    const bool recurrence = P.r.q <= 40;
    std::vector<Real> gammas;
    for (long k = 0;; ++k) {
        if (recurrence && k >= P.r.q) {
            // Gamma(a k + b) = Gamma(a (k-q) + b) * prod_{i<p} (a (k-q) + b + i)
            g = gammas[k - P.r.q];
            mpfr_mul_si(arg.get(), a.get(), k - P.r.q, MPFR_RNDN);
            mpfr_add(arg.get(), arg.get(), b.get(), MPFR_RNDN);
            for (long i = 0; i < P.r.p; ++i) {
                mpfr_add_si(tmp.get(), arg.get(), i, MPFR_RNDN);
                mpfr_mul(g.get(), g.get(), tmp.get(), MPFR_RNDN);
            }
        } else {
            mpfr_mul_si(arg.get(), a.get(), k, MPFR_RNDN);
            mpfr_add(arg.get(), arg.get(), b.get(), MPFR_RNDN);
            mpfr_gamma(g.get(), arg.get(), MPFR_RNDN);
        }
        if (recurrence) gammas.push_back(g);
        mpfr_div(t.get(), xk.get(), g.get(), MPFR_RNDN);
        if (k % 2 == 0) mpfr_add(sum.get(), sum.get(), t.get(), MPFR_RNDN);
        else mpfr_sub(sum.get(), sum.get(), t.get(), MPFR_RNDN);
        if (mpfr_cmp(t.get(), peak.get()) > 0) mpfr_set(peak.get(), t.get(), MPFR_RNDN);
        mpfr_abs(at.get(), sum.get(), MPFR_RNDN);
        mpfr_mul(at.get(), at.get(), tiny.get(), MPFR_RNDN);
        if (mpfr_cmp(t.get(), peak.get()) < 0 && mpfr_cmp(t.get(), at.get()) < 0 &&
            mpfr_cmp(t.get(), tiny.get()) < 0)
            break;
        mpfr_mul(xk.get(), xk.get(), xm.get(), MPFR_RNDN);
    }
    return sum;
}

std::optional<Real> asymptotic(const Params& P, double x, mpfr_prec_t bits) {
    Real a(bits), b(bits), xm(bits), xk(bits), sum(bits), y(bits), rg(bits), t(bits), at(bits),
        prev(bits), lim(bits), pi(bits), s(bits), ry(bits), grow(bits);
    set_alpha(a.get(), P.r);
    set_beta(b.get(), P, a.get());
    mpfr_set_d(xm.get(), x, MPFR_RNDN);
    mpfr_set_ui(xk.get(), 1, MPFR_RNDN);
    mpfr_const_pi(pi.get(), MPFR_RNDN);
    mpfr_set_si(prev.get(), -1, MPFR_RNDN);
    int small_run = 0;
    for (long k = 1; k < 2000000; ++k) {
        mpfr_div(xk.get(), xk.get(), xm.get(), MPFR_RNDN);
        mpfr_mul_si(y.get(), a.get(), k, MPFR_RNDN);
        mpfr_sub(y.get(), b.get(), y.get(), MPFR_RNDN);
        mpfr_round(ry.get(), y.get());
        mpfr_sub(s.get(), y.get(), ry.get(), MPFR_RNDN);
        mpfr_abs(s.get(), s.get(), MPFR_RNDN);
        const bool pole = mpfr_sgn(ry.get()) <= 0 && mpfr_cmp_d(s.get(), 1e-70) < 0;
        if (pole) {
            mpfr_set_zero(rg.get(), 1);
        } else if (mpfr_sgn(y.get()) > 0) {
            mpfr_gamma(rg.get(), y.get(), MPFR_RNDN);
            mpfr_ui_div(rg.get(), 1, rg.get(), MPFR_RNDN);
        } else {
            // 1/Gamma(y) = Gamma(1-y) sin(pi y) / pi
            mpfr_ui_sub(s.get(), 1, y.get(), MPFR_RNDN);
            mpfr_gamma(rg.get(), s.get(), MPFR_RNDN);
            mpfr_mul(s.get(), pi.get(), y.get(), MPFR_RNDN);
            mpfr_sin(s.get(), s.get(), MPFR_RNDN);
            mpfr_mul(rg.get(), rg.get(), s.get(), MPFR_RNDN);
            mpfr_div(rg.get(), rg.get(), pi.get(), MPFR_RNDN);
        }
        mpfr_mul(t.get(), xk.get(), rg.get(), MPFR_RNDN);
        if (k % 2 == 1) mpfr_add(sum.get(), sum.get(), t.get(), MPFR_RNDN);
        else mpfr_sub(sum.get(), sum.get(), t.get(), MPFR_RNDN);
        mpfr_abs(at.get(), t.get(), MPFR_RNDN);
        mpfr_abs(lim.get(), sum.get(), MPFR_RNDN);
        mpfr_mul_d(lim.get(), lim.get(), 1e-60, MPFR_RNDN);
        if (!mpfr_zero_p(sum.get()) && mpfr_cmp(at.get(), lim.get()) < 0) {
            if (++small_run >= 3) return sum;
        } else {
            small_run = 0;
        }
        if (mpfr_sgn(prev.get()) >= 0) {
            mpfr_mul_ui(grow.get(), prev.get(), 1000, MPFR_RNDN);
            if (mpfr_cmp(at.get(), grow.get()) > 0) return std::nullopt;
        }
        if (!mpfr_zero_p(at.get())) mpfr_set(prev.get(), at.get(), MPFR_RNDN);
    }
    return std::nullopt;
}

std::optional<std::string> evaluate(const Params& P, double alpha, double beta, double x) {
    const double mt = series_max_term_log10(alpha, beta, x);
    const int digits = static_cast<int>(std::max(0.0, mt)) + 70;
    std::optional<Real> value;
    if (digits <= kMaxDigits) {
        value = series(P, x, bits_for(digits));
    } else {
        value = asymptotic(P, x, bits_for(90));
    }
    if (!value) return std::nullopt;
    char* buf = nullptr;
    mpfr_asprintf(&buf, "%.49Re", value->get());
    std::string s(buf);
    mpfr_free_str(buf);
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string out_path = argc > 1 ? argv[1] : "ml_oracle.tsv";
    std::ofstream out(out_path);
    if (!out) {
        std::cerr << "cannot open " << out_path << "\n";
        return 2;
    }
    out << "# alpha\tbeta\tx\tE_{alpha,beta}(-x)\n";
    const std::vector<double> alphas{0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.999};
    struct BetaSpec {
        int alpha_multiple;
        long offset;
        const char* label;
    };
    const std::vector<BetaSpec> betas{{0, 1, "1"}, {1, 0, "a"}, {1, 1, "a+1"}, {1, 2, "a+2"}};
    int rows = 0, skipped = 0;
    for (double a : alphas) {
        const Rational r = rational_of(a);
        if (r.q == 0) {
            std::cerr << "alpha " << a << " is not a small rational\n";
            return 1;
        }
        for (const auto& bs : betas) {
            const double beta = bs.alpha_multiple * a + bs.offset;
            const Params P{r, bs.alpha_multiple, bs.offset};
            for (int e = -12; e <= 24; ++e) {
                const double x = std::pow(10.0, e / 4.0);
                const auto v = evaluate(P, a, beta, x);
                if (!v) {
                    std::cerr << "skip alpha=" << a << " beta=" << bs.label << " x=" << x << "\n";
                    ++skipped;
                    continue;
                }
                char head[128];
                std::snprintf(head, sizeof head, "%.17g\t%.17g\t%.17g\t", a, beta, x);
                out << head << *v << "\n";
                ++rows;
            }
            std::cerr << "alpha=" << a << " beta=" << bs.label << " done\n";
        }
    }
    std::cerr << rows << " rows, " << skipped << " skipped\n";
    return 0;
}
