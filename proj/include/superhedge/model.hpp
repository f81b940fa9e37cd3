#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "superhedge/rational.hpp"

namespace superhedge {

enum class Side { Upper, Lower };

std::string to_string(Side side);
Side parse_side(std::string_view text);

/// Index of a (negative, nonnegative) move pair. `neg` indexes
/// MoveSpace::negatives() (0 is the move closest to zero), `pos` indexes
/// MoveSpace::positives() (0 is the smallest nonnegative move).
struct PairIndex {
  int neg = 0;
  int pos = 0;

  friend auto operator<=>(const PairIndex&, const PairIndex&) = default;
};

/// Finite set of Market moves, split into negatives 0 > a1- > a2- > ... and
/// nonnegatives 0 <= a1+ < a2+ < ....
class MoveSpace {
 public:
  /// Throws ValidationError unless the moves are distinct and contain at
  /// least one negative and one nonnegative element.
  explicit MoveSpace(std::vector<Rational> moves);

  /// Comma-separated rationals, e.g. "-1,1,2" or "-1,0.5,3/2".
  static MoveSpace parse(std::string_view text);

  /// All moves in ascending order. This is the canonical move index used
  /// for paths, payoff vectors and LP rows.
  const std::vector<Rational>& moves() const { return ascending_; }
  const std::vector<Rational>& negatives() const { return negatives_; }
  const std::vector<Rational>& positives() const { return positives_; }

  int size() const { return static_cast<int>(ascending_.size()); }
  int negative_count() const { return static_cast<int>(negatives_.size()); }
  int positive_count() const { return static_cast<int>(positives_.size()); }
  int pair_count() const { return negative_count() * positive_count(); }

  /// Ascending index of negatives()[i] / positives()[j].
  int index_of_negative(int i) const { return negative_count() - 1 - i; }
  int index_of_positive(int j) const { return negative_count() + j; }

  const Rational& negative(int i) const { return negatives_.at(static_cast<std::size_t>(i)); }
  const Rational& positive(int j) const { return positives_.at(static_cast<std::size_t>(j)); }

  /// Least common denominator of all moves; moves() * denominator() are integers.
  std::int64_t denominator() const { return denominator_; }
  /// moves() expressed as integer multiples of 1/denominator().
  const std::vector<std::int64_t>& lattice_units() const { return units_; }

  bool contains(const Rational& move) const;
  bool is_subset_of(const MoveSpace& other) const;

  /// (-a1- * a1+, -al- * am+) as exact rationals.
  std::pair<Rational, Rational> exact_variances() const;

  std::string to_string() const;

  friend bool operator==(const MoveSpace& a, const MoveSpace& b) { return a.ascending_ == b.ascending_; }

 private:
  std::vector<Rational> ascending_;
  std::vector<Rational> negatives_;
  std::vector<Rational> positives_;
  std::int64_t denominator_ = 1;
  std::vector<std::int64_t> units_;
};

struct Variances {
  double sigma_min_sq = 0.0;
  double sigma_max_sq = 0.0;
};

Variances variances(const MoveSpace& moves);

/// A multinomial game: move space, number of rounds and the multiplier
/// applied to S_N before the payoff is evaluated (1/sqrt(N) for the scaled
/// games, 1 for the raw lattice).
struct GameSpec {
  GameSpec(MoveSpace moves, int rounds, double payoff_scale = 1.0);

  static GameSpec inv_sqrt_scaled(MoveSpace moves, int rounds);

  MoveSpace moves;
  int rounds;
  double payoff_scale;
};

// Payoff kinds -------------------------------------------------------------

struct Call {
  double strike = 0.0;
};

struct Put {
  double strike = 0.0;
};

/// max(0,s-k1) - 2 max(0,s-k2) + max(0,s-k3), requires k1 < k2 < k3.
struct Butterfly {
  double k1 = -0.5;
  double k2 = 0.5;
  double k3 = 1.5;
};

/// sin(frequency * s).
struct Sine {
  double frequency = 1.0;
};

/// Continuous piecewise-linear function through `points` (strictly
/// increasing x), extended linearly with the given slopes outside.
struct PiecewiseLinear {
  std::vector<std::pair<double, double>> points;
  double left_slope = 0.0;
  double right_slope = 0.0;

  double operator()(double s) const;
};

/// Evaluator over a full path. Receives the scaled moves x_n * payoff_scale.
struct PathDependent {
  std::string name;
  std::function<double(std::span<const double>)> evaluate;
};

class PayoffSpec {
 public:
  using Kind = std::variant<Call, Put, Butterfly, Sine, PiecewiseLinear, PathDependent>;

  /// Validates the kind's invariants; throws ValidationError.
  PayoffSpec(Kind kind, double weight = 1.0);

  const Kind& kind() const { return kind_; }
  /// Scalar multiplier applied to the kind's formula.
  double weight() const { return weight_; }

  bool is_european() const { return !std::holds_alternative<PathDependent>(kind_); }

  /// -f, of the same kind.
  PayoffSpec negated() const { return PayoffSpec(kind_, -weight_); }

  /// Evaluates a path-dependent payoff on scaled moves; European kinds are
  /// evaluated at the sum of the moves.
  double evaluate_path(std::span<const double> scaled_moves) const;

  std::string describe() const;

 private:
  Kind kind_;
  double weight_;
};

/// f(s) for a European payoff. PathDependent throws ValidationError.
double evaluate_payoff(const PayoffSpec& spec, double s);

/// Exact piecewise-linear form of Call/Put/Butterfly/PiecewiseLinear (weight
/// folded in); nullopt for Sine and PathDependent.
std::optional<PiecewiseLinear> to_piecewise_linear(const PayoffSpec& spec);

/// Parses either inline "name(args)" forms (call(k), put(k),
/// butterfly(k1,k2,k3), sin(freq)) or a JSON document.
PayoffSpec parse_payoff(std::string_view text);
PayoffSpec payoff_from_json(const nlohmann::json& j);
nlohmann::json payoff_to_json(const PayoffSpec& spec);

// Results ------------------------------------------------------------------

/// Two-point zero-mean measure on (negatives()[pair.neg], positives()[pair.pos]).
struct RiskNeutralNode {
  PairIndex pair;
  Rational prob_neg;
  Rational prob_pos;

  static RiskNeutralNode for_pair(const MoveSpace& moves, PairIndex pair);

  double p_neg() const { return prob_neg.to_double(); }
  double p_pos() const { return prob_pos.to_double(); }

  friend bool operator==(const RiskNeutralNode&, const RiskNeutralNode&) = default;
};

/// How the nodes of a PriceResult are identified.
enum class NodeKeying {
  Lattice,        // (round, S_n)
  Path,           // full partial path
  PrunedLattice,  // (round, S_n, inherited pair)
};

struct NodeKey {
  int round = 0;
  Rational sum;
  /// Ascending move indices; only populated for NodeKeying::Path.
  std::vector<int> path;
  /// Pair carried from the parent; only for PrunedLattice at rounds that do
  /// not re-maximize.
  std::optional<PairIndex> inherited;

  friend auto operator<=>(const NodeKey&, const NodeKey&) = default;
  friend bool operator==(const NodeKey&, const NodeKey&) = default;
};

struct NodeRecord {
  /// Value of the remaining game at this node; the payoff at round N.
  double value = 0.0;
  /// Investment M for the next round (0 at terminal nodes).
  double strategy = 0.0;
  /// Extremal conditional measure for the next round (absent at terminal nodes).
  std::optional<RiskNeutralNode> measure;
};

struct PriceResult {
  double price = 0.0;
  Side side = Side::Upper;
  NodeKeying keying = NodeKeying::Lattice;
  int rounds = 0;
  /// Re-maximization period for PrunedLattice results, 1 otherwise.
  int prune_period = 1;
  /// Empty when node recording was disabled.
  std::map<NodeKey, NodeRecord> nodes;

  bool has_nodes() const { return !nodes.empty(); }
  const NodeRecord& node(const NodeKey& key) const;
  double strategy(const NodeKey& key) const { return node(key).strategy; }
  double node_value(const NodeKey& key) const { return node(key).value; }
  const RiskNeutralNode& measure(const NodeKey& key) const;
};

nlohmann::json to_json(const PriceResult& result, const MoveSpace& moves, bool include_nodes);

}  // namespace superhedge
