#include "superhedge/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "superhedge/errors.hpp"

namespace superhedge {
namespace {

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double hinge(double s, double k) { return std::max(0.0, s - k); }

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double parse_double(std::string_view text) {
  std::string s(text);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ValidationError("invalid number '" + s + "'");
  }
  while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
  if (used != s.size()) throw ValidationError("invalid number '" + s + "'");
  return value;
}

PiecewiseLinear piecewise_from_json(const nlohmann::json& j) {
  PiecewiseLinear pl;
  const nlohmann::json& points = j.is_array() ? j : j.at("breakpoints");
  for (const auto& p : points) {
    if (!p.is_array() || p.size() != 2) throw ValidationError("breakpoints must be [x, y] pairs");
    pl.points.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  if (j.is_object()) {
    pl.left_slope = j.value("left_slope", 0.0);
    pl.right_slope = j.value("right_slope", 0.0);
  }
  return pl;
}

}  // namespace

std::string to_string(Side side) { return side == Side::Upper ? "upper" : "lower"; }

Side parse_side(std::string_view text) {
  std::string s = lowercase(text);
  if (s == "upper") return Side::Upper;
  if (s == "lower") return Side::Lower;
  throw ValidationError("side must be 'upper' or 'lower', got '" + std::string(text) + "'");
}

// MoveSpace -----------------------------------------------------------------

MoveSpace::MoveSpace(std::vector<Rational> moves) : ascending_(std::move(moves)) {
  std::sort(ascending_.begin(), ascending_.end());
  if (std::adjacent_find(ascending_.begin(), ascending_.end()) != ascending_.end()) {
    throw ValidationError("move space contains duplicate moves");
  }
  for (const Rational& a : ascending_) {
    (a.sign() < 0 ? negatives_ : positives_).push_back(a);
  }
  if (negatives_.empty() || positives_.empty()) {
    throw ValidationError("move space needs at least one negative and one nonnegative move: " + to_string());
  }
  std::reverse(negatives_.begin(), negatives_.end());

  for (const Rational& a : ascending_) {
    std::int64_t g = std::gcd(denominator_, a.den());
    __int128 lcm = static_cast<__int128>(denominator_ / g) * a.den();
    if (lcm > (static_cast<__int128>(1) << 52)) throw ValidationError("move denominators too large");
    denominator_ = static_cast<std::int64_t>(lcm);
  }
  for (const Rational& a : ascending_) {
    units_.push_back(a.num() * (denominator_ / a.den()));
  }
}

MoveSpace MoveSpace::parse(std::string_view text) {
  std::vector<Rational> moves;
  for (std::string_view part : split(text, ',')) moves.push_back(Rational::parse(part));
  return MoveSpace(std::move(moves));
}

bool MoveSpace::contains(const Rational& move) const {
  return std::binary_search(ascending_.begin(), ascending_.end(), move);
}

bool MoveSpace::is_subset_of(const MoveSpace& other) const {
  return std::all_of(ascending_.begin(), ascending_.end(),
                     [&](const Rational& a) { return other.contains(a); });
}

std::pair<Rational, Rational> MoveSpace::exact_variances() const {
  return {-(negatives_.front() * positives_.front()), -(negatives_.back() * positives_.back())};
}

std::string MoveSpace::to_string() const {
  std::string out;
  for (const Rational& a : ascending_) {
    if (!out.empty()) out += ",";
    out += a.to_string();
  }
  return out;
}

Variances variances(const MoveSpace& moves) {
  auto [lo, hi] = moves.exact_variances();
  return {lo.to_double(), hi.to_double()};
}

GameSpec::GameSpec(MoveSpace moves_, int rounds_, double payoff_scale_)
    : moves(std::move(moves_)), rounds(rounds_), payoff_scale(payoff_scale_) {
  if (rounds < 1) throw ValidationError("rounds must be >= 1");
  if (!(payoff_scale > 0.0) || !std::isfinite(payoff_scale)) {
    throw ValidationError("payoff_scale must be positive and finite");
  }
}

GameSpec GameSpec::inv_sqrt_scaled(MoveSpace moves, int rounds) {
  if (rounds < 1) throw ValidationError("rounds must be >= 1");
  return GameSpec(std::move(moves), rounds, 1.0 / std::sqrt(static_cast<double>(rounds)));
}

// Payoffs -------------------------------------------------------------------

double PiecewiseLinear::operator()(double s) const {
  const auto& [x0, y0] = points.front();
  if (s <= x0) return y0 + left_slope * (s - x0);
  const auto& [xn, yn] = points.back();
  if (s >= xn) return yn + right_slope * (s - xn);
  auto it = std::upper_bound(points.begin(), points.end(), s,
                             [](double v, const std::pair<double, double>& p) { return v < p.first; });
  const auto& [x1, y1] = *it;
  const auto& [xa, ya] = *(it - 1);
  return ya + (y1 - ya) * (s - xa) / (x1 - xa);
}

PayoffSpec::PayoffSpec(Kind kind, double weight) : kind_(std::move(kind)), weight_(weight) {
  if (!std::isfinite(weight_)) throw ValidationError("payoff weight must be finite");
  std::visit(overloaded{
                 [](const Butterfly& b) {
                   if (!(b.k1 < b.k2 && b.k2 < b.k3)) {
                     throw ValidationError("butterfly strikes must satisfy k1 < k2 < k3");
                   }
                 },
                 [](const PiecewiseLinear& pl) {
                   if (pl.points.empty()) throw ValidationError("piecewise-linear payoff needs a breakpoint");
                   for (std::size_t i = 1; i < pl.points.size(); ++i) {
                     if (!(pl.points[i - 1].first < pl.points[i].first)) {
                       throw ValidationError("piecewise-linear breakpoints must be strictly increasing in x");
                     }
                   }
                 },
                 [](const PathDependent& p) {
                   if (!p.evaluate) throw ValidationError("path-dependent payoff without evaluator");
                 },
                 [](const auto&) {},
             },
             kind_);
}

double evaluate_payoff(const PayoffSpec& spec, double s) {
  double raw = std::visit(overloaded{
                              [s](const Call& c) { return hinge(s, c.strike); },
                              [s](const Put& p) { return std::max(0.0, p.strike - s); },
                              [s](const Butterfly& b) {
                                // Piecewise form keeps the value exactly 0 outside [k1, k3].
                                if (s <= b.k1) return 0.0;
                                if (s <= b.k2) return s - b.k1;
                                if (s <= b.k3) return 2.0 * b.k2 - b.k1 - s;
                                return 2.0 * b.k2 - b.k1 - b.k3;
                              },
                              [s](const Sine& w) { return std::sin(w.frequency * s); },
                              [s](const PiecewiseLinear& pl) { return pl(s); },
                              [](const PathDependent&) -> double {
                                throw ValidationError("path-dependent payoff requires full path");
                              },
                          },
                          spec.kind());
  return spec.weight() * raw;
}

double PayoffSpec::evaluate_path(std::span<const double> scaled_moves) const {
  if (const auto* p = std::get_if<PathDependent>(&kind_)) return weight_ * p->evaluate(scaled_moves);
  double s = 0.0;
  for (double x : scaled_moves) s += x;
  return evaluate_payoff(*this, s);
}

std::string PayoffSpec::describe() const {
  std::ostringstream os;
  if (weight_ != 1.0) os << weight_ << "*";
  std::visit(overloaded{
                 [&](const Call& c) { os << "call(" << c.strike << ")"; },
                 [&](const Put& p) { os << "put(" << p.strike << ")"; },
                 [&](const Butterfly& b) { os << "butterfly(" << b.k1 << "," << b.k2 << "," << b.k3 << ")"; },
                 [&](const Sine& w) { os << "sin(" << w.frequency << ")"; },
                 [&](const PiecewiseLinear& pl) { os << "piecewise_linear[" << pl.points.size() << "]"; },
                 [&](const PathDependent& p) { os << "path(" << p.name << ")"; },
             },
             kind_);
  return os.str();
}

std::optional<PiecewiseLinear> to_piecewise_linear(const PayoffSpec& spec) {
  std::optional<PiecewiseLinear> pl = std::visit(
      overloaded{
          [](const Call& c) -> std::optional<PiecewiseLinear> {
            return PiecewiseLinear{{{c.strike, 0.0}}, 0.0, 1.0};
          },
          [](const Put& p) -> std::optional<PiecewiseLinear> {
            return PiecewiseLinear{{{p.strike, 0.0}}, -1.0, 0.0};
          },
          [](const Butterfly& b) -> std::optional<PiecewiseLinear> {
            return PiecewiseLinear{{{b.k1, 0.0}, {b.k2, b.k2 - b.k1}, {b.k3, b.k2 - b.k1 - (b.k3 - b.k2)}},
                                   0.0,
                                   0.0};
          },
          [](const PiecewiseLinear& p) -> std::optional<PiecewiseLinear> { return p; },
          [](const auto&) -> std::optional<PiecewiseLinear> { return std::nullopt; },
      },
      spec.kind());
  if (pl && spec.weight() != 1.0) {
    for (auto& point : pl->points) point.second *= spec.weight();
    pl->left_slope *= spec.weight();
    pl->right_slope *= spec.weight();
  }
  return pl;
}

PayoffSpec payoff_from_json(const nlohmann::json& j) {
  try {
    if (j.is_array()) return PayoffSpec(piecewise_from_json(j));
    if (!j.is_object()) throw ValidationError("payoff JSON must be an object or an array");
    double weight = j.value("weight", 1.0);
    if (!j.contains("kind")) {
      if (j.contains("breakpoints")) return PayoffSpec(piecewise_from_json(j), weight);
      throw ValidationError("payoff JSON needs a \"kind\"");
    }
    std::string kind = lowercase(j.at("kind").get<std::string>());
    if (kind == "call") return PayoffSpec(Call{j.at("strike").get<double>()}, weight);
    if (kind == "put") return PayoffSpec(Put{j.at("strike").get<double>()}, weight);
    if (kind == "butterfly") {
      return PayoffSpec(Butterfly{j.value("k1", -0.5), j.value("k2", 0.5), j.value("k3", 1.5)}, weight);
    }
    if (kind == "sine" || kind == "sin") return PayoffSpec(Sine{j.at("frequency").get<double>()}, weight);
    if (kind == "piecewise_linear") return PayoffSpec(piecewise_from_json(j), weight);
    throw ValidationError("unknown payoff kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed payoff JSON: ") + e.what());
  }
}

nlohmann::json payoff_to_json(const PayoffSpec& spec) {
  nlohmann::json j = std::visit(
      overloaded{
          [](const Call& c) { return nlohmann::json{{"kind", "call"}, {"strike", c.strike}}; },
          [](const Put& p) { return nlohmann::json{{"kind", "put"}, {"strike", p.strike}}; },
          [](const Butterfly& b) {
            return nlohmann::json{{"kind", "butterfly"}, {"k1", b.k1}, {"k2", b.k2}, {"k3", b.k3}};
          },
          [](const Sine& w) { return nlohmann::json{{"kind", "sine"}, {"frequency", w.frequency}}; },
          [](const PiecewiseLinear& pl) {
            nlohmann::json points = nlohmann::json::array();
            for (const auto& [x, y] : pl.points) points.push_back({x, y});
            return nlohmann::json{{"kind", "piecewise_linear"},
                                  {"breakpoints", points},
                                  {"left_slope", pl.left_slope},
                                  {"right_slope", pl.right_slope}};
          },
          [](const PathDependent& p) { return nlohmann::json{{"kind", "path_dependent"}, {"name", p.name}}; },
      },
      spec.kind());
  if (spec.weight() != 1.0) j["weight"] = spec.weight();
  return j;
}

PayoffSpec parse_payoff(std::string_view text) {
  std::string s(text);
  auto first = s.find_first_not_of(" \t\n");
  if (first == std::string::npos) throw ValidationError("empty payoff");
  if (s[first] == '{' || s[first] == '[') {
    nlohmann::json j = nlohmann::json::parse(s, nullptr, false);
    if (j.is_discarded()) throw ValidationError("payoff is not valid JSON");
    return payoff_from_json(j);
  }

  auto open = s.find('(');
  if (open != std::string::npos && s.back() == ')') {
    std::string name = lowercase(s.substr(first, open - first));
    std::vector<double> args;
    std::string inner = s.substr(open + 1, s.size() - open - 2);
    if (inner.find_first_not_of(" \t") != std::string::npos) {
      for (std::string_view part : split(inner, ',')) args.push_back(parse_double(part));
    }
    auto need = [&](std::size_t n) {
      if (args.size() != n) {
        throw ValidationError(name + " expects " + std::to_string(n) + " argument(s)");
      }
    };
    if (name == "call") {
      need(1);
      return PayoffSpec(Call{args[0]});
    }
    if (name == "put") {
      need(1);
      return PayoffSpec(Put{args[0]});
    }
    if (name == "butterfly") {
      need(3);
      return PayoffSpec(Butterfly{args[0], args[1], args[2]});
    }
    if (name == "sin" || name == "sine") {
      need(1);
      return PayoffSpec(Sine{args[0]});
    }
    if (name == "constant" || name == "const") {
      need(1);
      return PayoffSpec(PiecewiseLinear{{{0.0, args[0]}}, 0.0, 0.0});
    }
    throw ValidationError("unknown payoff '" + name + "'");
  }

  std::ifstream in(s);
  if (!in) throw ValidationError("payoff '" + s + "' is neither an inline spec nor a readable file");
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ValidationError("payoff file '" + s + "' is not valid JSON");
  return payoff_from_json(j);
}

// Results -------------------------------------------------------------------

RiskNeutralNode RiskNeutralNode::for_pair(const MoveSpace& moves, PairIndex pair) {
  const Rational& a_neg = moves.negative(pair.neg);
  const Rational& a_pos = moves.positive(pair.pos);
  Rational spread = a_pos - a_neg;
  return RiskNeutralNode{pair, a_pos / spread, -a_neg / spread};
}

const NodeRecord& PriceResult::node(const NodeKey& key) const {
  auto it = nodes.find(key);
  if (it == nodes.end()) {
    throw std::out_of_range("no node at round " + std::to_string(key.round) + ", sum " + key.sum.to_string());
  }
  return it->second;
}

const RiskNeutralNode& PriceResult::measure(const NodeKey& key) const {
  const NodeRecord& rec = node(key);
  if (!rec.measure) throw std::out_of_range("terminal node has no conditional measure");
  return *rec.measure;
}

nlohmann::json to_json(const PriceResult& result, const MoveSpace& moves, bool include_nodes) {
  nlohmann::json j;
  j["price"] = result.price;
  j["side"] = to_string(result.side);
  j["N"] = result.rounds;
  nlohmann::json mv = nlohmann::json::array();
  for (const Rational& a : moves.moves()) mv.push_back(a.to_string());
  j["moves"] = mv;
  if (result.keying == NodeKeying::PrunedLattice) j["prune_period"] = result.prune_period;
  if (include_nodes) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& [key, rec] : result.nodes) {
      nlohmann::json n{{"round", key.round}, {"sum", key.sum.to_string()}, {"value", rec.value}};
      if (result.keying == NodeKeying::Path) n["path"] = key.path;
      if (key.inherited) n["inherited"] = {key.inherited->neg, key.inherited->pos};
      if (rec.measure) {
        n["strategy"] = rec.strategy;
        n["pair"] = {rec.measure->pair.neg, rec.measure->pair.pos};
        n["prob_neg"] = rec.measure->prob_neg.to_string();
        n["prob_pos"] = rec.measure->prob_pos.to_string();
      }
      nodes.push_back(std::move(n));
    }
    j["nodes"] = std::move(nodes);
  }
  return j;
}

}  // namespace superhedge
