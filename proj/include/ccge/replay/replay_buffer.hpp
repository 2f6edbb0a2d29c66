#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "ccge/common/eigen.hpp"
#include "ccge/common/rng.hpp"

namespace ccge::replay {

// terminal is true only for genuine MDP termination; horizon truncation is
// stored as false so the target still bootstraps through s_next. Discrete
// actions are stored as a single float index.
struct Transition {
  std::vector<float> state;
  std::vector<float> action;
  float reward = 0.0f;
  std::vector<float> next_state;
  bool terminal = false;
  std::vector<float> oracle_action;

  bool operator==(const Transition&) const = default;
};

enum class BufferMode {
  kFifo,  // overwrite the oldest transition once full
  kGdm,   // global distribution matching: reservoir sampling over the stream
};

BufferMode parse_buffer_mode(std::string_view name);
std::string_view to_string(BufferMode mode);

// Minibatch with one transition per row.
struct Batch {
  MatrixF states;
  MatrixF actions;
  VectorF rewards;
  MatrixF next_states;
  VectorF terminals;  // 1 for terminal, 0 otherwise
  MatrixF oracle_actions;  // zero columns when the run stores no oracle actions
  std::vector<std::size_t> slots;

  std::size_t size() const { return static_cast<std::size_t>(states.rows()); }
  bool has_oracle_actions() const { return oracle_actions.cols() > 0; }
  Transition at(std::size_t row) const;
};

class ReplayBuffer {
 public:
  // oracle_action_dim may be 0 for runs without an oracle. reservoir_seed
  // drives the gdm replacement decisions only.
  ReplayBuffer(std::size_t capacity, BufferMode mode, int state_dim, int action_dim, int oracle_action_dim,
               std::uint64_t reservoir_seed = 0);

  void push(const Transition& transition);

  // Uniform with replacement over stored transitions. Throws
  // WarmupIncompleteError on an empty buffer; the training loop gates
  // updates on its warmup step count.
  Batch sample(std::size_t batch_size, Rng& rng) const;

  // Gathers specific slots into a batch.
  Batch gather(const std::vector<std::size_t>& slots) const;

  Transition at_slot(std::size_t slot) const;

  // FIFO mode: index 0 is the oldest retained transition.
  Transition at_logical(std::size_t index) const;

  // Stream position (0-based) of the transition held in a slot.
  std::uint64_t stream_index(std::size_t slot) const { return stream_ids_[slot]; }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return stored_; }
  std::uint64_t total_seen() const { return total_seen_; }
  BufferMode mode() const { return mode_; }
  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  int oracle_action_dim() const { return oracle_dim_; }

 private:
  void write(std::size_t slot, const Transition& t);

  std::size_t capacity_;
  BufferMode mode_;
  int state_dim_;
  int action_dim_;
  int oracle_dim_;
  std::size_t stored_ = 0;
  std::size_t head_ = 0;
  std::uint64_t total_seen_ = 0;
  Rng reservoir_rng_;

  std::vector<float> states_;
  std::vector<float> actions_;
  std::vector<float> rewards_;
  std::vector<float> next_states_;
  std::vector<std::uint8_t> terminals_;
  std::vector<float> oracle_actions_;
  std::vector<std::uint64_t> stream_ids_;
};

}  // namespace ccge::replay
