// EM estimation of the structure-class mixture {P_l, C_l} for a given
// alphabet, with log-likelihood tracking, plus the tiny-K exhaustive
// partition maximizer used as a test oracle.
#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "pcm/structures.hpp"

namespace pcm {

struct TooFewSamples : std::runtime_error {
    TooFewSamples() : std::runtime_error("window too small for the requested alphabet") {}
};

struct TooLarge : std::runtime_error {
    TooLarge() : std::runtime_error("exhaustive partition search limited to K <= 8") {}
};

using WindowData = std::vector<Vec3c>;

/// Ordered subset of structure classes hypothesized present in the window.
class Alphabet {
public:
    Alphabet(std::initializer_list<Structure> cs) : Alphabet(std::span(cs.begin(), cs.size())) {}

    explicit Alphabet(std::span<const Structure> cs) {
        if (cs.empty() || cs.size() > 4) throw std::invalid_argument("alphabet size must be 1..4");
        size_ = static_cast<int>(cs.size());
        for (int i = 0; i < size_; ++i) {
            cls_[i] = cs[i];
            if (i > 0 && index_of(cls_[i]) <= index_of(cls_[i - 1]))
                throw std::invalid_argument("alphabet indices must be strictly increasing");
        }
    }

    int size() const { return size_; }
    Structure operator[](int i) const { return cls_[i]; }
    const Structure* begin() const { return cls_.data(); }
    const Structure* end() const { return cls_.data() + size_; }

    bool operator==(const Alphabet& o) const {
        return size_ == o.size_ && std::equal(begin(), end(), o.begin());
    }

    /// Total covariance parameter count u(A).
    int param_total() const {
        int u = 0;
        for (Structure c : *this) u += param_count(c);
        return u;
    }

    /// The 11 candidate alphabets under the alternative hypotheses: six of
    /// size 2, four of size 3, one of size 4, in (m, lexicographic) order.
    static const std::vector<Alphabet>& all_h1() {
        static const std::vector<Alphabet> a = [] {
            std::vector<Alphabet> v;
            const auto& s = kAllStructures;
            for (int i = 0; i < 4; ++i)
                for (int j = i + 1; j < 4; ++j) v.push_back(Alphabet{s[i], s[j]});
            for (int i = 0; i < 4; ++i)
                for (int j = i + 1; j < 4; ++j)
                    for (int k = j + 1; k < 4; ++k) v.push_back(Alphabet{s[i], s[j], s[k]});
            v.push_back(Alphabet{s[0], s[1], s[2], s[3]});
            return v;
        }();
        return a;
    }

private:
    std::array<Structure, 4> cls_{};
    int size_ = 0;
};

struct EmConfig {
    int h_max = 10;
    double epsilon = 1e-4;       // relative log-likelihood change threshold
    double weight_floor = 1e-12;
    double prior_floor = 1e-6;
};

struct EmState {
    Alphabet alphabet;
    std::vector<double> priors;           // |alphabet|
    std::vector<Herm3> covariances;       // |alphabet|
    std::vector<double> responsibilities; // K x |alphabet|, row-major
    std::vector<double> loglik_trace;     // one entry per completed iteration
    int iterations_run = 0;

    double resp(std::size_t k, int l) const {
        return responsibilities[k * alphabet.size() + l];
    }
};

namespace detail {

struct MixtureEval {
    double loglik = 0.0;
    std::vector<double> responsibilities;
};

/// One pass over the window: responsibilities and total mixture
/// log-likelihood, in log domain with max-subtraction.
inline MixtureEval eval_mixture(std::span<const Vec3c> z, const EmState& st, double weight_floor,
                                bool want_resp) {
    const int n = st.alphabet.size();
    std::vector<GaussianPdf> pdfs;
    pdfs.reserve(n);
    std::array<double, 4> log_prior{};
    for (int l = 0; l < n; ++l) {
        pdfs.emplace_back(st.covariances[l]);
        log_prior[l] = st.priors[l] > 0 ? std::log(st.priors[l])
                                        : -std::numeric_limits<double>::infinity();
    }
    MixtureEval out;
    if (want_resp) out.responsibilities.resize(z.size() * n);
    std::array<double, 4> lw{};
    for (std::size_t k = 0; k < z.size(); ++k) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int l = 0; l < n; ++l) {
            lw[l] = log_prior[l] + pdfs[l](z[k]);
            mx = std::max(mx, lw[l]);
        }
        double denom = 0.0;
        for (int l = 0; l < n; ++l) denom += std::exp(lw[l] - mx);
        denom = std::max(denom, weight_floor);
        out.loglik += mx + std::log(denom);
        if (want_resp) {
            for (int l = 0; l < n; ++l)
                out.responsibilities[k * n + l] = std::exp(lw[l] - mx) / denom;
        }
    }
    return out;
}

}  // namespace detail

/// Deterministic initialization: uniform priors, per-class constrained MLEs
/// of the whole window. The constraint sets differ per class, which is what
/// breaks the symmetry between components.
inline EmState initialize(std::span<const Vec3c> z, const Alphabet& a) {
    if (z.size() < 2 * static_cast<std::size_t>(a.size())) throw TooFewSamples{};
    EmState st{a, {}, {}, {}, {}, 0};
    st.priors.assign(a.size(), 1.0 / a.size());
    st.covariances.reserve(a.size());
    for (Structure c : a) st.covariances.push_back(unit_weight_mle(c, z));
    return st;
}

/// E-step: posterior responsibilities at the current parameters.
inline std::vector<double> e_step(std::span<const Vec3c> z, const EmState& st,
                                  double weight_floor = 1e-12) {
    return detail::eval_mixture(z, st, weight_floor, true).responsibilities;
}

/// Mixture log-likelihood at the current parameters.
inline double mixture_loglik(std::span<const Vec3c> z, const EmState& st) {
    return detail::eval_mixture(z, st, 1e-300, false).loglik;
}

/// M-step: prior and covariance updates from responsibilities. A class whose
/// responsibility column collapses keeps a floored prior and falls back to
/// its full-window MLE.
inline void m_step(std::span<const Vec3c> z, std::span<const double> responsibilities,
                   const Alphabet& a, const EmConfig& cfg, std::vector<double>& priors,
                   std::vector<Herm3>& covariances) {
    const int n = a.size();
    const std::size_t K = z.size();
    std::vector<double> col(K);
    double prior_sum = 0.0;
    for (int l = 0; l < n; ++l) {
        double csum = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            col[k] = responsibilities[k * n + l];
            csum += col[k];
        }
        if (csum < cfg.weight_floor) {
            priors[l] = cfg.prior_floor;
            covariances[l] = unit_weight_mle(a[l], z);
        } else {
            priors[l] = std::max(csum / static_cast<double>(K), cfg.prior_floor);
            covariances[l] = weighted_mle(a[l], z, col);
        }
        prior_sum += priors[l];
    }
    for (int l = 0; l < n; ++l) priors[l] /= prior_sum;
}

/// Full EM run: alternate E/M from the deterministic initialization until
/// the relative log-likelihood change drops below epsilon or h_max is hit.
/// An update that fails to improve the likelihood — possible only when the
/// positive-definiteness safeguard had to perturb a degenerate component —
/// is rejected and the previous parameters are kept, so the recorded trace
/// is non-decreasing by construction. Final responsibilities are a fresh
/// E-step at the final parameters.
inline EmState run_em(std::span<const Vec3c> z, const Alphabet& a, const EmConfig& cfg) {
    EmState st = initialize(z, a);
    double prev = 0.0;
    bool have_prev = false;
    for (int h = 0; h < cfg.h_max; ++h) {
        auto ev = detail::eval_mixture(z, st, cfg.weight_floor, true);
        const std::vector<double> saved_priors = st.priors;
        const std::vector<Herm3> saved_covs = st.covariances;
        m_step(z, ev.responsibilities, a, cfg, st.priors, st.covariances);
        const double ll = mixture_loglik(z, st);
        if (have_prev && ll < prev) {
            st.priors = saved_priors;
            st.covariances = saved_covs;
            break;
        }
        st.loglik_trace.push_back(ll);
        st.iterations_run = h + 1;
        if (have_prev) {
            const double delta =
                prev != 0.0 ? std::abs((ll - prev) / prev) : std::abs(ll - prev);
            if (delta < cfg.epsilon) {
                prev = ll;
                break;
            }
        }
        prev = ll;
        have_prev = true;
    }
    st.responsibilities = e_step(z, st, cfg.weight_floor);
    return st;
}

/// Exhaustive maximum-likelihood partition search, tractable only for tiny
/// windows; kept as an independent oracle for the EM path.
struct OracleResult {
    std::vector<int> labels;  // index into the alphabet, per pixel
    double loglik = -std::numeric_limits<double>::infinity();
};

inline OracleResult oracle_mla(std::span<const Vec3c> z, const Alphabet& a) {
    const std::size_t K = z.size();
    if (K > 8) throw TooLarge{};
    const int n = a.size();
    if (K < static_cast<std::size_t>(n)) throw TooFewSamples{};

    OracleResult best;
    std::vector<int> labels(K, 0);
    std::vector<Vec3c> group;
    std::uint64_t total = 1;
    for (std::size_t k = 0; k < K; ++k) total *= static_cast<std::uint64_t>(n);
    for (std::uint64_t code = 0; code < total; ++code) {
        std::uint64_t c = code;
        int seen_mask = 0;
        for (std::size_t k = 0; k < K; ++k) {
            labels[k] = static_cast<int>(c % n);
            seen_mask |= 1 << labels[k];
            c /= n;
        }
        if (seen_mask != (1 << n) - 1) continue;  // every group nonempty
        double ll = 0.0;
        bool ok = true;
        for (int l = 0; l < n && ok; ++l) {
            group.clear();
            for (std::size_t k = 0; k < K; ++k)
                if (labels[k] == l) group.push_back(z[k]);
            try {
                const Herm3 C = unit_weight_mle(a[l], group);
                for (const Vec3c& v : group) ll += log_pdf(v, C);
            } catch (const std::runtime_error&) {
                ok = false;  // degenerate group, skip this partition
            }
        }
        if (ok && ll > best.loglik) {
            best.loglik = ll;
            best.labels = labels;
        }
    }
    return best;
}

}  // namespace pcm
