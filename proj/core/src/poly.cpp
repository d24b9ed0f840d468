#include "ampu/poly.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ampu {

MultiPoly MultiPoly::constant(int nvars, double c) {
    MultiPoly p(nvars);
    p.add_term(Key(nvars, 0), c);
    return p;
}

MultiPoly MultiPoly::variable(int nvars, int index) {
    MultiPoly p(nvars);
    Key k(nvars, 0);
    k[index] = 1;
    p.add_term(k, 1.0);
    return p;
}

int MultiPoly::degree() const {
    int d = 0;
    for (const auto& [k, c] : terms_)
        d = std::max(d, std::accumulate(k.begin(), k.end(), 0));
    return d;
}

void MultiPoly::add_term(const Key& exponents, double coeff) {
    if (static_cast<int>(exponents.size()) != nvars_)
        throw std::invalid_argument("exponent vector length mismatch");
    if (coeff == 0.0) return;
    auto [it, inserted] = terms_.emplace(exponents, coeff);
    if (!inserted) {
        it->second += coeff;
        if (it->second == 0.0) terms_.erase(it);
    }
}

MultiPoly MultiPoly::operator+(const MultiPoly& o) const {
    MultiPoly r = *this;
    for (const auto& [k, c] : o.terms_) r.add_term(k, c);
    return r;
}

MultiPoly MultiPoly::operator-(const MultiPoly& o) const {
    MultiPoly r = *this;
    for (const auto& [k, c] : o.terms_) r.add_term(k, -c);
    return r;
}

MultiPoly MultiPoly::operator*(const MultiPoly& o) const {
    MultiPoly r(nvars_);
    for (const auto& [ka, ca] : terms_) {
        for (const auto& [kb, cb] : o.terms_) {
            Key k(nvars_);
            for (int i = 0; i < nvars_; ++i) k[i] = ka[i] + kb[i];
            r.add_term(k, ca * cb);
        }
    }
    return r;
}

MultiPoly MultiPoly::operator*(double s) const {
    MultiPoly r(nvars_);
    for (const auto& [k, c] : terms_) r.add_term(k, c * s);
    return r;
}

MultiPoly MultiPoly::derivative(int var) const {
    MultiPoly r(nvars_);
    for (const auto& [k, c] : terms_) {
        if (k[var] == 0) continue;
        Key kk = k;
        kk[var] -= 1;
        r.add_term(kk, c * k[var]);
    }
    return r;
}

MultiPoly MultiPoly::shifted(int var, double shift) const {
    if (shift == 0.0) return *this;
    MultiPoly r(nvars_);
    for (const auto& [k, c] : terms_) {
        // (x + s)^e expanded binomially.
        int e = k[var];
        double binom = 1.0;
        double pow_s = 1.0;
        for (int j = e; j >= 0; --j) {
            Key kk = k;
            kk[var] = j;
            r.add_term(kk, c * binom * pow_s);
            if (j > 0) {
                binom = binom * j / (e - j + 1);
                pow_s *= shift;
            }
        }
    }
    return r;
}

MultiPoly MultiPoly::embedded(int new_nvars, const std::vector<int>& var_map) const {
    MultiPoly r(new_nvars);
    for (const auto& [k, c] : terms_) {
        Key kk(new_nvars, 0);
        for (int i = 0; i < nvars_; ++i) kk[var_map[i]] += k[i];
        r.add_term(kk, c);
    }
    return r;
}

double MultiPoly::eval(const Eigen::VectorXd& x) const {
    double total = 0.0;
    for (const auto& [k, c] : terms_) {
        double t = c;
        for (int i = 0; i < nvars_; ++i)
            for (int e = 0; e < k[i]; ++e) t *= x[i];
        total += t;
    }
    return total;
}

}  // namespace ampu
