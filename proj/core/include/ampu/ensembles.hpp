#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace ampu {

struct EnsembleError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class EntryKind { gaussian, rademacher, uniform_pm, sparse_subgaussian, mixture };

enum class Normalization { var_one_over_m, var_one_over_n, profile };

// Declarative description of a matrix entry law. All kinds produce mean-zero
// entries whose variance equals the scale implied by `normalization`
// (1/m, 1/n, or W_ab/N under a variance profile). The `mixture` kind adds an
// independent Gaussian component of variance nu0^2 * scale on top of `base`,
// so its total entry variance is (1 + nu0^2) * scale.
struct EnsembleSpec {
    EntryKind kind = EntryKind::gaussian;
    Normalization normalization = Normalization::var_one_over_m;
    double p = 1.0;     // sparse_subgaussian: P{entry != 0}
    double nu0 = 0.0;   // mixture: Gaussian component amplitude
    std::shared_ptr<EnsembleSpec> base;  // mixture only

    void validate() const;
    std::string tag() const;

    static EnsembleSpec gaussian(Normalization n = Normalization::var_one_over_m);
    static EnsembleSpec rademacher(Normalization n = Normalization::var_one_over_m);
    static EnsembleSpec uniform_pm(Normalization n = Normalization::var_one_over_m);
    static EnsembleSpec sparse(double p, Normalization n = Normalization::var_one_over_m);
    static EnsembleSpec mixture_of(EnsembleSpec base, double nu0);
};

void to_json(nlohmann::json& j, const EnsembleSpec& s);
void from_json(const nlohmann::json& j, EnsembleSpec& s);

// Block variance structure for symmetric matrices: E A_ij^2 = W_ab / N for
// i in class a, j in class b.
struct VarianceProfile {
    int k = 1;
    Eigen::MatrixXd W;          // k x k symmetric, nonnegative
    Eigen::VectorXd fractions;  // length k, entries in (0,1), sums to 1

    void validate() const;
    // Contiguous class assignment: sizes differ from round(c_a * N) by <= 1.
    std::vector<int> assign_classes(int N) const;

    static VarianceProfile single(double w = 1.0);
};

enum class NonzeroLaw { unit_gaussian, plus_one, signed_unit };

// Sparse signal law p_X = (1-epsilon) delta_0 + epsilon * nonzero_law.
struct SignalSpec {
    double epsilon = 0.1;
    NonzeroLaw nonzero_law = NonzeroLaw::unit_gaussian;

    void validate() const;
    double second_moment() const;  // E X^2
};

void to_json(nlohmann::json& j, const SignalSpec& s);
void from_json(const nlohmann::json& j, SignalSpec& s);

// Draws a single entry with unit scale (variance 1, or (1+nu0^2) for
// mixtures); callers multiply by sqrt(scale).
double sample_unit_entry(const EnsembleSpec& spec, std::mt19937_64& rng);

Eigen::MatrixXd sample_rectangular(const EnsembleSpec& spec, int m, int n,
                                   std::uint64_t seed);

Eigen::MatrixXd sample_symmetric(const VarianceProfile& profile,
                                 const EnsembleSpec& spec, int N,
                                 std::uint64_t seed);

Eigen::VectorXd sample_signal(const SignalSpec& spec, int n, std::uint64_t seed);

}  // namespace ampu
