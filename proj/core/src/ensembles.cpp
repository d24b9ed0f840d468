#include "ampu/ensembles.hpp"

#include <cmath>

#include "ampu/rng.hpp"

namespace ampu {

namespace {

const char* kind_name(EntryKind k) {
    switch (k) {
        case EntryKind::gaussian: return "gaussian";
        case EntryKind::rademacher: return "rademacher";
        case EntryKind::uniform_pm: return "uniform_pm";
        case EntryKind::sparse_subgaussian: return "sparse_subgaussian";
        case EntryKind::mixture: return "mixture";
    }
    return "?";
}

EntryKind kind_from_name(const std::string& s) {
    if (s == "gaussian") return EntryKind::gaussian;
    if (s == "rademacher") return EntryKind::rademacher;
    if (s == "uniform_pm") return EntryKind::uniform_pm;
    if (s == "sparse_subgaussian") return EntryKind::sparse_subgaussian;
    if (s == "mixture") return EntryKind::mixture;
    throw EnsembleError("unknown ensemble kind: " + s);
}

const char* norm_name(Normalization n) {
    switch (n) {
        case Normalization::var_one_over_m: return "var_one_over_m";
        case Normalization::var_one_over_n: return "var_one_over_n";
        case Normalization::profile: return "profile";
    }
    return "?";
}

Normalization norm_from_name(const std::string& s) {
    if (s == "var_one_over_m") return Normalization::var_one_over_m;
    if (s == "var_one_over_n") return Normalization::var_one_over_n;
    if (s == "profile") return Normalization::profile;
    throw EnsembleError("unknown normalization: " + s);
}

}  // namespace

void EnsembleSpec::validate() const {
    if (kind == EntryKind::sparse_subgaussian && !(p > 0.0 && p <= 1.0))
        throw EnsembleError("sparse_subgaussian requires p in (0,1]");
    if (kind == EntryKind::mixture) {
        if (nu0 < 0.0) throw EnsembleError("mixture requires nu0 >= 0");
        if (!base) throw EnsembleError("mixture requires a base spec");
        if (base->kind == EntryKind::mixture)
            throw EnsembleError("nested mixtures are not supported");
        base->validate();
    }
}

std::string EnsembleSpec::tag() const {
    std::string t = kind_name(kind);
    if (kind == EntryKind::sparse_subgaussian) t += "(p=" + std::to_string(p) + ")";
    if (kind == EntryKind::mixture)
        t = "mixture(" + base->tag() + ",nu0=" + std::to_string(nu0) + ")";
    return t;
}

EnsembleSpec EnsembleSpec::gaussian(Normalization n) {
    EnsembleSpec s;
    s.kind = EntryKind::gaussian;
    s.normalization = n;
    return s;
}
EnsembleSpec EnsembleSpec::rademacher(Normalization n) {
    EnsembleSpec s;
    s.kind = EntryKind::rademacher;
    s.normalization = n;
    return s;
}
EnsembleSpec EnsembleSpec::uniform_pm(Normalization n) {
    EnsembleSpec s;
    s.kind = EntryKind::uniform_pm;
    s.normalization = n;
    return s;
}
EnsembleSpec EnsembleSpec::sparse(double p, Normalization n) {
    EnsembleSpec s;
    s.kind = EntryKind::sparse_subgaussian;
    s.p = p;
    s.normalization = n;
    return s;
}
EnsembleSpec EnsembleSpec::mixture_of(EnsembleSpec base, double nu0) {
    EnsembleSpec s;
    s.kind = EntryKind::mixture;
    s.normalization = base.normalization;
    s.nu0 = nu0;
    s.base = std::make_shared<EnsembleSpec>(std::move(base));
    return s;
}

void to_json(nlohmann::json& j, const EnsembleSpec& s) {
    j = nlohmann::json{{"kind", kind_name(s.kind)},
                       {"normalization", norm_name(s.normalization)},
                       {"params", nlohmann::json::object()}};
    if (s.kind == EntryKind::sparse_subgaussian) j["params"]["p"] = s.p;
    if (s.kind == EntryKind::mixture) {
        j["params"]["nu0"] = s.nu0;
        nlohmann::json b;
        to_json(b, *s.base);
        j["params"]["base"] = b;
    }
}

void from_json(const nlohmann::json& j, EnsembleSpec& s) {
    s = EnsembleSpec{};
    s.kind = kind_from_name(j.at("kind").get<std::string>());
    if (j.contains("normalization"))
        s.normalization = norm_from_name(j["normalization"].get<std::string>());
    if (j.contains("params")) {
        const auto& p = j["params"];
        if (p.contains("p")) s.p = p["p"].get<double>();
        if (p.contains("nu0")) s.nu0 = p["nu0"].get<double>();
        if (p.contains("base")) {
            auto b = std::make_shared<EnsembleSpec>();
            from_json(p["base"], *b);
            s.base = std::move(b);
        }
    }
    s.validate();
}

void VarianceProfile::validate() const {
    if (k < 1) throw EnsembleError("profile requires k >= 1");
    if (W.rows() != k || W.cols() != k) throw EnsembleError("W must be k x k");
    if (fractions.size() != k) throw EnsembleError("fractions must have length k");
    if (!W.isApprox(W.transpose(), 1e-12)) throw EnsembleError("W must be symmetric");
    if ((W.array() < 0.0).any()) throw EnsembleError("W entries must be nonnegative");
    for (int a = 0; a < k; ++a)
        if (!(fractions[a] > 0.0 && fractions[a] < 1.0) && k > 1)
            throw EnsembleError("fractions must lie in (0,1)");
    if (std::abs(fractions.sum() - 1.0) > 1e-12)
        throw EnsembleError("fractions must sum to 1");
}

std::vector<int> VarianceProfile::assign_classes(int N) const {
    std::vector<int> cls(N);
    // Largest-remainder rounding keeps |C_a| within 1 of round(c_a * N).
    std::vector<int> size(k);
    int assigned = 0;
    for (int a = 0; a < k; ++a) {
        size[a] = static_cast<int>(std::floor(fractions[a] * N));
        assigned += size[a];
    }
    std::vector<std::pair<double, int>> rem(k);
    for (int a = 0; a < k; ++a)
        rem[a] = {fractions[a] * N - std::floor(fractions[a] * N), a};
    std::sort(rem.begin(), rem.end(), [](auto& x, auto& y) { return x.first > y.first; });
    for (int i = 0; assigned < N; ++i, ++assigned) size[rem[i % k].second]++;
    int pos = 0;
    for (int a = 0; a < k; ++a)
        for (int i = 0; i < size[a]; ++i) cls[pos++] = a;
    return cls;
}

VarianceProfile VarianceProfile::single(double w) {
    VarianceProfile p;
    p.k = 1;
    p.W = Eigen::MatrixXd::Constant(1, 1, w);
    p.fractions = Eigen::VectorXd::Constant(1, 1.0);
    return p;
}

void SignalSpec::validate() const {
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw EnsembleError("epsilon must lie in [0,1]");
}

double SignalSpec::second_moment() const {
    // All supported nonzero laws have unit second moment.
    return epsilon;
}

void to_json(nlohmann::json& j, const SignalSpec& s) {
    const char* law = s.nonzero_law == NonzeroLaw::unit_gaussian ? "unit_gaussian"
                      : s.nonzero_law == NonzeroLaw::plus_one    ? "plus_one"
                                                                 : "signed_unit";
    j = nlohmann::json{{"epsilon", s.epsilon}, {"nonzero_law", law}};
}

void from_json(const nlohmann::json& j, SignalSpec& s) {
    s.epsilon = j.at("epsilon").get<double>();
    std::string law = j.value("nonzero_law", "unit_gaussian");
    if (law == "unit_gaussian")
        s.nonzero_law = NonzeroLaw::unit_gaussian;
    else if (law == "plus_one")
        s.nonzero_law = NonzeroLaw::plus_one;
    else if (law == "signed_unit")
        s.nonzero_law = NonzeroLaw::signed_unit;
    else
        throw EnsembleError("unknown nonzero_law: " + law);
    s.validate();
}

double sample_unit_entry(const EnsembleSpec& spec, std::mt19937_64& rng) {
    switch (spec.kind) {
        case EntryKind::gaussian: {
            std::normal_distribution<double> g;
            return g(rng);
        }
        case EntryKind::rademacher:
            return (rng() & 1u) ? 1.0 : -1.0;
        case EntryKind::uniform_pm: {
            std::uniform_real_distribution<double> u(-1.0, 1.0);
            return std::sqrt(3.0) * u(rng);
        }
        case EntryKind::sparse_subgaussian: {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            double v = u(rng);
            if (v >= spec.p) return 0.0;
            double mag = 1.0 / std::sqrt(spec.p);
            return (v < spec.p / 2.0) ? mag : -mag;
        }
        case EntryKind::mixture: {
            double b = sample_unit_entry(*spec.base, rng);
            std::normal_distribution<double> g;
            return b + spec.nu0 * g(rng);
        }
    }
    return 0.0;
}

Eigen::MatrixXd sample_rectangular(const EnsembleSpec& spec, int m, int n,
                                   std::uint64_t seed) {
    spec.validate();
    if (m < 1 || n < 1) throw EnsembleError("matrix dimensions must be positive");
    if (spec.normalization == Normalization::profile)
        throw EnsembleError("rectangular sampling does not take a variance profile");
    double scale =
        spec.normalization == Normalization::var_one_over_m ? 1.0 / m : 1.0 / n;
    double s = std::sqrt(scale);
    auto rng = make_stream(seed, 0x7ec7a11ULL);
    Eigen::MatrixXd A(m, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i) A(i, j) = s * sample_unit_entry(spec, rng);
    return A;
}

Eigen::MatrixXd sample_symmetric(const VarianceProfile& profile,
                                 const EnsembleSpec& spec, int N,
                                 std::uint64_t seed) {
    profile.validate();
    spec.validate();
    if (N < profile.k) throw EnsembleError("N must be at least the class count");
    auto cls = profile.assign_classes(N);
    auto rng = make_stream(seed, 0x5e77ULL);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
    for (int i = 0; i < N; ++i) {
        for (int j = i + 1; j < N; ++j) {
            double w = profile.W(cls[i], cls[j]);
            double v = w == 0.0 ? 0.0
                                : std::sqrt(w / N) * sample_unit_entry(spec, rng);
            A(i, j) = v;
            A(j, i) = v;
        }
    }
    return A;
}

Eigen::VectorXd sample_signal(const SignalSpec& spec, int n, std::uint64_t seed) {
    spec.validate();
    if (n < 1) throw EnsembleError("signal length must be positive");
    auto rng = make_stream(seed, 0x516aa1ULL);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        if (u(rng) >= spec.epsilon) continue;
        switch (spec.nonzero_law) {
            case NonzeroLaw::unit_gaussian: x[i] = g(rng); break;
            case NonzeroLaw::plus_one: x[i] = 1.0; break;
            case NonzeroLaw::signed_unit: x[i] = (rng() & 1u) ? 1.0 : -1.0; break;
        }
    }
    return x;
}

}  // namespace ampu
