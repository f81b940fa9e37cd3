#include "superhedge/singlestep.hpp"

#include <stdexcept>

namespace superhedge {

StepKernel::StepKernel(const MoveSpace& moves) : positive_count_(moves.positive_count()) {
  pairs_.reserve(static_cast<std::size_t>(moves.pair_count()));
  for (int i = 0; i < moves.negative_count(); ++i) {
    for (int j = 0; j < moves.positive_count(); ++j) {
      PairIndex index{i, j};
      RiskNeutralNode node = RiskNeutralNode::for_pair(moves, index);
      pairs_.push_back(Pair{index,
                            moves.index_of_negative(i),
                            moves.index_of_positive(j),
                            node.p_neg(),
                            node.p_pos(),
                            (moves.positive(j) - moves.negative(i)).to_double(),
                            node});
    }
  }
}

const StepKernel::Pair& StepKernel::pair(PairIndex index) const {
  return pairs_.at(static_cast<std::size_t>(index.neg * positive_count_ + index.pos));
}

StepResult StepKernel::best(std::span<const double> values, Side side) const {
  const Pair* best = &pairs_.front();
  double best_value = combine(*best, values);
  for (std::size_t k = 1; k < pairs_.size(); ++k) {
    double v = combine(pairs_[k], values);
    if (side == Side::Upper ? v > best_value : v < best_value) {
      best_value = v;
      best = &pairs_[k];
    }
  }
  return StepResult{best_value, best->index, best->node};
}

StepResult upper_price_step(const MoveSpace& moves, std::span<const double> values) {
  if (values.size() != static_cast<std::size_t>(moves.size())) {
    throw std::invalid_argument("one value per move required");
  }
  return StepKernel(moves).best(values, Side::Upper);
}

StepResult lower_price_step(const MoveSpace& moves, std::span<const double> values) {
  if (values.size() != static_cast<std::size_t>(moves.size())) {
    throw std::invalid_argument("one value per move required");
  }
  return StepKernel(moves).best(values, Side::Lower);
}

}  // namespace superhedge
