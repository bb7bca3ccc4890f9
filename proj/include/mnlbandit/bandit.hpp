#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mnlbandit/assortment.hpp"
#include "mnlbandit/estimation.hpp"
#include "mnlbandit/mnl_model.hpp"

namespace mnl {

struct EnvironmentConfig {
    int N = 50;
    int K = 5;
    int d = 5;
    double B = 1.0;
    long T = 1000;
    std::uint64_t seed = 0;
};

enum class Phase { kPlanning, kWarmup };

/// Per-round trace entry.
struct RoundRecord {
    long t = 0;
    Phase phase = Phase::kPlanning;
    Assortment offered;
    ChoiceOutcome outcome;
    double inst_regret = 0.0;
    double sigma_sq = 0.0;
    double kappa_star = 0.0;
    double elapsed_ms = 0.0;
};

/// Fresh features uniform on the unit ball and rewards uniform on [0, 1].
RoundContext env_step(const EnvironmentConfig& cfg, Rng& rng);

struct Diagnostics {
    double inst_regret = 0.0;
    double sigma_sq = 0.0;
    double kappa_star = 0.0;
};

/// Simulator-side quantities computed from the true parameter: instantaneous
/// regret against the optimal assortment of size at most K, the reward
/// variance of the offered assortment (outside option pays 0), and kappa*_t
/// over the optimal set.
Diagnostics regret_and_diagnostics(const RoundContext& ctx, const Assortment& offered,
                                   const MnlParameter& w_star, int K);

// ---------------------------------------------------------------------------
// Agents. One instance per simulation replica; strictly sequential within a
// replica (round t+1 depends on round t).

class Agent {
  public:
    virtual ~Agent() = default;
    virtual const std::string& name() const = 0;
    virtual Assortment select(const RoundContext& ctx, Rng& rng) = 0;
    virtual void update(const RoundContext& ctx, const Assortment& offered,
                        const ChoiceOutcome& outcome) = 0;
    /// Whether the last select() was an adaptive warm-up round.
    virtual bool last_round_was_warmup() const { return false; }
};

/// Constant-time optimistic agent with adaptive warm-up and RS-OMD updates.
class OfuMnlPpAgent : public Agent {
  public:
    struct Options {
        double tau_multiplier = 1.0;  // scales the warm-up threshold tau_t
    };

    OfuMnlPpAgent(int d, double B, int K, double delta);
    OfuMnlPpAgent(int d, double B, int K, double delta, Options opts);

    const std::string& name() const override { return name_; }
    Assortment select(const RoundContext& ctx, Rng& rng) override;
    void update(const RoundContext& ctx, const Assortment& offered,
                const ChoiceOutcome& outcome) override;
    bool last_round_was_warmup() const override { return warmup_round_; }

    const OmdState& planning_state() const { return plan_; }
    const OmdState& warmup_state() const { return warm_; }
    const HyperParams& hyper_params() const { return hp_; }
    /// Latest warm-up confidence set; the full ball before any warm-up round.
    const std::optional<Ellipsoid>& warmup_set() const { return warmup_set_; }

  private:
    std::string name_ = "OFU-MNL++";
    HyperParams hp_;  // delta here is the per-family budget (delta / 2)
    int K_;
    Options opts_;
    long t_ = 1;
    OmdState plan_;
    OmdState warm_;
    std::optional<Ellipsoid> warmup_set_;
    bool warmup_round_ = false;
    int warmup_item_ = 0;
};

/// MLE-based optimistic agent; refits the norm-constrained MLE every round and
/// solves one optimistic-utility program per item.
class OfuMleMnlAgent : public Agent {
  public:
    OfuMleMnlAgent(int d, double B, int K, double delta);

    const std::string& name() const override { return name_; }
    Assortment select(const RoundContext& ctx, Rng& rng) override;
    void update(const RoundContext& ctx, const Assortment& offered,
                const ChoiceOutcome& outcome) override;

    const MleState& mle_state() const { return mle_; }

  private:
    std::string name_ = "OFU-MLE-MNL";
    int K_;
    double delta_;
    long t_ = 1;
    MleState mle_;
    std::vector<OptimisticWarmStart> warm_;  // per item slot
};

struct BaselineOptions {
    double alpha0_scale = 1.0;  // alpha_0 = scale * sqrt(d log(t + 1))
    double lambda0 = 1.0;       // V_1 = lambda0 I
};

/// UCB-MNL: MLE utilities plus alpha_0 |x|_{V^{-1}} bonuses.
class UcbMnlAgent : public Agent {
  public:
    UcbMnlAgent(int d, double B, int K, BaselineOptions opts = {});

    const std::string& name() const override { return name_; }
    Assortment select(const RoundContext& ctx, Rng& rng) override;
    void update(const RoundContext& ctx, const Assortment& offered,
                const ChoiceOutcome& outcome) override;

    const PsdMatrix& design_matrix() const { return V_; }

  private:
    std::string name_ = "UCB-MNL";
    int K_;
    BaselineOptions opts_;
    long t_ = 1;
    MleState mle_;
    PsdMatrix V_;
};

/// TS-MNL: utilities from a Gaussian perturbation of the MLE with covariance
/// alpha_0^2 V^{-1}.
class TsMnlAgent : public Agent {
  public:
    TsMnlAgent(int d, double B, int K, BaselineOptions opts = {});

    const std::string& name() const override { return name_; }
    Assortment select(const RoundContext& ctx, Rng& rng) override;
    void update(const RoundContext& ctx, const Assortment& offered,
                const ChoiceOutcome& outcome) override;

  private:
    std::string name_ = "TS-MNL";
    int K_;
    BaselineOptions opts_;
    long t_ = 1;
    MleState mle_;
    PsdMatrix V_;
};

/// Factory for the algorithm names accepted by the harness.
std::unique_ptr<Agent> make_agent(const std::string& algo, const EnvironmentConfig& cfg,
                                  double delta, double tau_multiplier,
                                  const BaselineOptions& baseline);

}  // namespace mnl
