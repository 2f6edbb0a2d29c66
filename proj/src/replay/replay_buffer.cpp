#include "ccge/replay/replay_buffer.hpp"

#include <cmath>
#include <string>

#include "ccge/common/errors.hpp"

namespace ccge::replay {

BufferMode parse_buffer_mode(std::string_view name) {
  if (name == "fifo") return BufferMode::kFifo;
  if (name == "gdm") return BufferMode::kGdm;
  throw ConfigError("unknown buffer mode '" + std::string(name) + "' (expected fifo or gdm)");
}

std::string_view to_string(BufferMode mode) { return mode == BufferMode::kFifo ? "fifo" : "gdm"; }

Transition Batch::at(std::size_t row) const {
  const auto r = static_cast<Eigen::Index>(row);
  auto to_vec = [r](const MatrixF& m) {
    std::vector<float> out(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[static_cast<std::size_t>(c)] = m(r, c);
    return out;
  };
  return Transition{to_vec(states), to_vec(actions), rewards(r), to_vec(next_states), terminals(r) != 0.0f,
                    to_vec(oracle_actions)};
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, BufferMode mode, int state_dim, int action_dim,
                           int oracle_action_dim, std::uint64_t reservoir_seed)
    : capacity_(capacity),
      mode_(mode),
      state_dim_(state_dim),
      action_dim_(action_dim),
      oracle_dim_(oracle_action_dim),
      reservoir_rng_(make_rng(reservoir_seed, Stream::kBuffer)) {
  if (capacity == 0) throw ConfigError("ReplayBuffer: capacity must be positive");
  if (state_dim <= 0 || action_dim <= 0 || oracle_action_dim < 0) {
    throw ShapeError("ReplayBuffer: invalid transition dimensions");
  }
  states_.resize(capacity * static_cast<std::size_t>(state_dim));
  next_states_.resize(capacity * static_cast<std::size_t>(state_dim));
  actions_.resize(capacity * static_cast<std::size_t>(action_dim));
  oracle_actions_.resize(capacity * static_cast<std::size_t>(oracle_action_dim));
  rewards_.resize(capacity);
  terminals_.resize(capacity);
  stream_ids_.resize(capacity);
}

void ReplayBuffer::write(std::size_t slot, const Transition& t) {
  const auto sd = static_cast<std::size_t>(state_dim_);
  const auto ad = static_cast<std::size_t>(action_dim_);
  const auto od = static_cast<std::size_t>(oracle_dim_);
  std::copy(t.state.begin(), t.state.end(), states_.begin() + static_cast<std::ptrdiff_t>(slot * sd));
  std::copy(t.next_state.begin(), t.next_state.end(), next_states_.begin() + static_cast<std::ptrdiff_t>(slot * sd));
  std::copy(t.action.begin(), t.action.end(), actions_.begin() + static_cast<std::ptrdiff_t>(slot * ad));
  std::copy(t.oracle_action.begin(), t.oracle_action.end(),
            oracle_actions_.begin() + static_cast<std::ptrdiff_t>(slot * od));
  rewards_[slot] = t.reward;
  terminals_[slot] = t.terminal ? 1 : 0;
  stream_ids_[slot] = total_seen_;
}

void ReplayBuffer::push(const Transition& t) {
  if (static_cast<int>(t.state.size()) != state_dim_ || static_cast<int>(t.next_state.size()) != state_dim_ ||
      static_cast<int>(t.action.size()) != action_dim_ || static_cast<int>(t.oracle_action.size()) != oracle_dim_) {
    throw ShapeError("ReplayBuffer::push: transition dimensions do not match the buffer");
  }
  if (!std::isfinite(t.reward)) throw NonFiniteError("ReplayBuffer::push: non-finite reward");
  if (mode_ == BufferMode::kFifo) {
    write(head_, t);
    head_ = (head_ + 1) % capacity_;
    if (stored_ < capacity_) ++stored_;
  } else if (stored_ < capacity_) {
    write(stored_, t);
    ++stored_;
  } else {
    // Algorithm R: keep the (n+1)-th item with probability capacity/(n+1).
    std::uniform_int_distribution<std::uint64_t> pick(0, total_seen_);
    const std::uint64_t j = pick(reservoir_rng_);
    if (j < capacity_) write(static_cast<std::size_t>(j), t);
  }
  ++total_seen_;
}

Batch ReplayBuffer::gather(const std::vector<std::size_t>& slots) const {
  const auto n = static_cast<Eigen::Index>(slots.size());
  Batch batch;
  batch.states.resize(n, state_dim_);
  batch.next_states.resize(n, state_dim_);
  batch.actions.resize(n, action_dim_);
  batch.oracle_actions.resize(n, oracle_dim_);
  batch.rewards.resize(n);
  batch.terminals.resize(n);
  batch.slots = slots;
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::size_t slot = slots[static_cast<std::size_t>(r)];
    if (slot >= stored_) throw std::out_of_range("ReplayBuffer::gather: slot not filled");
    for (int c = 0; c < state_dim_; ++c) {
      batch.states(r, c) = states_[slot * state_dim_ + c];
      batch.next_states(r, c) = next_states_[slot * state_dim_ + c];
    }
    for (int c = 0; c < action_dim_; ++c) batch.actions(r, c) = actions_[slot * action_dim_ + c];
    for (int c = 0; c < oracle_dim_; ++c) batch.oracle_actions(r, c) = oracle_actions_[slot * oracle_dim_ + c];
    batch.rewards(r) = rewards_[slot];
    batch.terminals(r) = terminals_[slot] ? 1.0f : 0.0f;
  }
  return batch;
}

Batch ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
  if (stored_ == 0) {
    throw WarmupIncompleteError("ReplayBuffer::sample: warmup incomplete (buffer is empty, batch of " +
                                std::to_string(batch_size) + " requested)");
  }
  std::uniform_int_distribution<std::size_t> pick(0, stored_ - 1);
  std::vector<std::size_t> slots(batch_size);
  for (auto& s : slots) s = pick(rng);
  return gather(slots);
}

Transition ReplayBuffer::at_slot(std::size_t slot) const { return gather({slot}).at(0); }

Transition ReplayBuffer::at_logical(std::size_t index) const {
  if (index >= stored_) throw std::out_of_range("ReplayBuffer::at_logical: index past stored count");
  const std::size_t oldest = stored_ < capacity_ ? 0 : head_;
  return at_slot((oldest + index) % capacity_);
}

}  // namespace ccge::replay
