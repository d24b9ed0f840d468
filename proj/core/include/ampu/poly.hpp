#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <vector>

namespace ampu {

// Dense-exponent multivariate polynomial in a small number of variables.
// Terms are keyed by exponent vectors; arithmetic is exact up to double
// rounding. Intended for the low-degree component functions of AMP models
// (degree <= 8, <= 6 variables), not for general computer algebra.
class MultiPoly {
  public:
    using Key = std::vector<int>;

    MultiPoly() = default;
    explicit MultiPoly(int nvars) : nvars_(nvars) {}

    static MultiPoly constant(int nvars, double c);
    static MultiPoly variable(int nvars, int index);

    int nvars() const { return nvars_; }
    bool empty() const { return terms_.empty(); }
    int degree() const;
    const std::map<Key, double>& terms() const { return terms_; }

    void add_term(const Key& exponents, double coeff);

    MultiPoly operator+(const MultiPoly& o) const;
    MultiPoly operator-(const MultiPoly& o) const;
    MultiPoly operator*(const MultiPoly& o) const;
    MultiPoly operator*(double s) const;

    MultiPoly derivative(int var) const;

    // Substitute var -> (var + shift); used to center Gaussian label
    // components with nonzero mean.
    MultiPoly shifted(int var, double shift) const;

    // Re-express this polynomial over `new_nvars` variables, mapping old
    // variable i to new variable var_map[i].
    MultiPoly embedded(int new_nvars, const std::vector<int>& var_map) const;

    double eval(const Eigen::VectorXd& x) const;

  private:
    int nvars_ = 0;
    std::map<Key, double> terms_;
};

}  // namespace ampu
