// Penalized log-likelihood-ratio detection architecture: H0 term, H1 terms
// under the two estimation strategies, MOS penalties, hypothesis selection,
// per-pixel classification, and the H0-only competitor baseline.
#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>

#include "pcm/em.hpp"

namespace pcm {

struct InvalidRho : std::runtime_error {
    InvalidRho() : std::runtime_error("GIC requires rho > 1") {}
};

enum class PenaltyKind { aic, bic, gic };

struct PenaltyRule {
    PenaltyKind kind = PenaltyKind::aic;
    double rho = 0.0;  // GIC only
};

/// Strategy P1 runs one EM per candidate alphabet; P2 runs a single
/// full-alphabet EM and selects components by sorted priors.
enum class Strategy { p1, p2 };

enum class Hypothesis { h0, h1_1, h1_2, h1_3 };

/// MOS penalty factor.
inline double penalty_gamma(PenaltyRule rule, int K) {
    switch (rule.kind) {
        case PenaltyKind::aic: return 1.0;
        case PenaltyKind::bic: return 0.5 * std::log(6.0 * static_cast<double>(K));
        case PenaltyKind::gic:
            if (!(rule.rho > 1.0)) throw InvalidRho{};
            return 0.5 * (1.0 + rule.rho);
    }
    return 1.0;
}

/// h1(A_m) = gamma (u(A_m) + m + 1); the m+1 term counts the mixing PMF.
inline double penalty_h1(const Alphabet& a, double gamma) {
    return gamma * static_cast<double>(a.param_total() + a.size());
}

/// h0(A_0) = gamma u(A_0).
inline double penalty_h0(Structure c, double gamma) {
    return gamma * static_cast<double>(param_count(c));
}

struct H0Result {
    double value;          // max over classes of penalized H0 log-likelihood
    Structure best_class;
    std::array<double, 4> per_class;  // penalized value per class, index i-1
};

/// Penalized H0 term: best single-structure fit of the whole window. Ties
/// break toward the smaller class index.
inline H0Result h0_term(std::span<const Vec3c> z, double gamma) {
    H0Result r{-std::numeric_limits<double>::infinity(), Structure::unconstrained, {}};
    for (Structure c : kAllStructures) {
        const GaussianPdf pdf(unit_weight_mle(c, z));
        double ll = 0.0;
        for (const Vec3c& v : z) ll += pdf(v);
        const double val = ll - penalty_h0(c, gamma);
        r.per_class[index_of(c) - 1] = val;
        if (val > r.value) {
            r.value = val;
            r.best_class = c;
        }
    }
    return r;
}

/// H0-only competitor: selects the most plausible single structure.
inline Structure baseline_classify(std::span<const Vec3c> z, PenaltyRule rule) {
    return h0_term(z, penalty_gamma(rule, static_cast<int>(z.size()))).best_class;
}

struct H1Result {
    double value;
    int m_hat;
    Alphabet alphabet;
    EmState state;
};

/// First strategy: one EM per candidate alphabet (6 + 4 + 1 = 11 runs).
/// Ties break toward smaller m, then lexicographically smaller alphabet,
/// which is the enumeration order of Alphabet::all_h1().
inline H1Result h1_term_p1(std::span<const Vec3c> z, double gamma, const EmConfig& cfg) {
    std::optional<H1Result> best;
    for (const Alphabet& a : Alphabet::all_h1()) {
        EmState st = run_em(z, a, cfg);
        const double val = mixture_loglik(z, st) - penalty_h1(a, gamma);
        if (!best || val > best->value)
            best = H1Result{val, a.size() - 1, a, std::move(st)};
    }
    return std::move(*best);
}

/// Second strategy: a single full-alphabet EM; for each m keep the m+1
/// most probable components with their priors as estimated (not
/// renormalized: the discarded mass acts as an extra cost for dropping a
/// component, which is what makes the selection order-consistent) and
/// penalize as under P1.
inline H1Result h1_term_p2(std::span<const Vec3c> z, double gamma, const EmConfig& cfg) {
    const Alphabet full{Structure::unconstrained, Structure::reflection, Structure::rotation,
                        Structure::azimuth};
    EmState st = run_em(z, full, cfg);

    // Sort component indices by descending prior, ties toward smaller class.
    std::array<int, 4> order{0, 1, 2, 3};
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return st.priors[a] > st.priors[b]; });

    std::optional<H1Result> best;
    for (int m = 1; m <= 3; ++m) {
        std::array<Structure, 4> sel{};
        for (int i = 0; i <= m; ++i) sel[i] = full[order[i]];
        std::sort(sel.begin(), sel.begin() + m + 1,
                  [](Structure a, Structure b) { return index_of(a) < index_of(b); });
        const Alphabet sub(std::span<const Structure>(sel.data(), m + 1));

        EmState sub_state{sub, {}, {}, {}, st.loglik_trace, st.iterations_run};
        for (int i = 0; i <= m; ++i) {
            int l = 0;
            while (full[l] != sub[i]) ++l;
            sub_state.priors.push_back(st.priors[l]);
            sub_state.covariances.push_back(st.covariances[l]);
        }

        const double val = mixture_loglik(z, sub_state) - penalty_h1(sub, gamma);
        if (!best || val > best->value)
            best = H1Result{val, m, sub, std::move(sub_state)};
    }
    best->state.responsibilities = e_step(z, best->state, cfg.weight_floor);
    return std::move(*best);
}

inline H1Result h1_term(std::span<const Vec3c> z, double gamma, Strategy s, const EmConfig& cfg) {
    return s == Strategy::p1 ? h1_term_p1(z, gamma, cfg) : h1_term_p2(z, gamma, cfg);
}

struct DetectionOutcome {
    double statistic;
    double threshold;
    Hypothesis declared;
    int m_hat;                 // meaningful when declared != h0
    Alphabet alphabet_hat;
    Structure h0_class;
    std::vector<Structure> labels;  // per-pixel class
    EmState em_state;               // winning H1 configuration
};

/// Full penalized LLRT decision for one window.
inline DetectionOutcome decide(std::span<const Vec3c> z, PenaltyRule rule, Strategy strategy,
                               double eta, const EmConfig& cfg) {
    const double gamma = penalty_gamma(rule, static_cast<int>(z.size()));
    const H0Result h0 = h0_term(z, gamma);
    H1Result h1 = h1_term(z, gamma, strategy, cfg);

    DetectionOutcome out{h1.value - h0.value,
                         eta,
                         Hypothesis::h0,
                         h1.m_hat,
                         h1.alphabet,
                         h0.best_class,
                         {},
                         std::move(h1.state)};
    out.labels.resize(z.size(), h0.best_class);
    if (out.statistic > eta) {
        out.declared = static_cast<Hypothesis>(h1.m_hat);
        const int n = out.alphabet_hat.size();
        for (std::size_t k = 0; k < z.size(); ++k) {
            int arg = 0;
            for (int l = 1; l < n; ++l)
                if (out.em_state.resp(k, l) > out.em_state.resp(k, arg)) arg = l;
            out.labels[k] = out.alphabet_hat[arg];
        }
    }
    return out;
}

}  // namespace pcm
