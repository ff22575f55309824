#pragma once

#include <vector>

#include "coalmine/params.hpp"
#include "coalmine/structure.hpp"

namespace coalmine {

/// One edge-resource-competition game: coalitions bid nonce lengths for a
/// share of their reward factor at a common unit price.
struct ErcInput {
  std::vector<double> theta;  // reward factor per coalition, > 0
  std::vector<long> caps;     // nonce cap per coalition, >= 0
  double price = 0.0;
};

enum class Regime {
  interior,  // solves the stationarity condition
  zeroed,    // priced out, bids 0
  capped,    // pinned at its nonce cap
  monopoly,  // sole bidder; buys a single nonce when theta > p
};

/// Real-valued equilibrium of the relaxed game.
struct RealSolution {
  std::vector<double> nonce;
  std::vector<Regime> regime;
  double total = 0.0;  // sum of nonce
};

struct MuShare {
  int mu = 0;
  double nonce = 0.0;
  double utility = 0.0;
};

/// Integer equilibrium bids with per-coalition utilities and, once
/// allocate_uniform() has run, per-miner bookkeeping shares.
struct ErcEquilibrium {
  std::vector<long> nonce;
  std::vector<double> utility;
  long total_nonce = 0;
  std::vector<std::vector<MuShare>> allocations;
};

/// Largest integer nonce count whose upload plus compute time fits in T'.
/// Returns 0 when the header alone cannot be uploaded in time.
long nonce_cap(const SystemParams& params);

struct BestResponse {
  double nonce = 0.0;
  bool price_floor = false;  // price was 0: demand unbounded, returned the cap
};

/// clamp(sqrt(theta * others / p) - others, 0, cap).
BestResponse best_response(double theta, double others, double price, long cap);

/// Derivative of the coalition payoff in its own bid.
double utility_gradient(double theta, double others, double price, double nonce);

/// Relaxed equilibrium. Coalitions whose interior bid would be negative are
/// zeroed and coalitions whose bid exceeds the cap are pinned, then the
/// survivors are re-solved until every regime is self-consistent. A single
/// bidder (M = 1, or the only one left unpinned facing zero demand) follows
/// the monopoly rule. Throws std::invalid_argument on theta <= 0, a negative
/// cap or price <= 0.
RealSolution closed_form_ne(const ErcInput& input);

/// Rounds interior bids to floor or ceil, whichever pays more against the
/// opponents' current bids; coalitions are resolved in index order and
/// ties go to the smaller bid.
ErcEquilibrium integer_ne(const RealSolution& real, const ErcInput& input);

/// closed_form_ne followed by integer_ne.
ErcEquilibrium solve_erc(const ErcInput& input);

/// Splits each coalition's bid and utility evenly over its members. The last
/// member takes the residue so shares sum to the totals exactly.
void allocate_uniform(ErcEquilibrium& equilibrium, const CoalitionStructure& structure);

/// max |gradient| over [0, cap] against fixed opponents: bounds the payoff
/// lost by rounding. Infinite when `others` is 0 (the payoff jumps at 0).
double gap_bound(double theta, double others, double price, long cap);

}  // namespace coalmine
