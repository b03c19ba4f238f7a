#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "rlnc/arith.hpp"
#include "rlnc/error.hpp"

namespace rlnc {

using node_id = std::uint32_t;

template <class Arith>
using storage_t = std::vector<typename Arith::word_type>;

/// A coded packet: coefficient vector mu and, in payload mode, the matching
/// combination of the messages.
template <class Arith>
struct packet {
  storage_t<Arith> mu;
  storage_t<Arith> payload;
};

/// Span of received coefficient vectors over F_q^k, kept in reduced
/// row-echelon form. Rows are stored in insertion order; each row has a 1 in
/// its pivot column and every other row is 0 there. Optional payload rows
/// follow every row operation.
template <class Arith>
class subspace {
 public:
  using word = typename Arith::word_type;

  subspace(Arith arith, std::size_t dimension, std::size_t payload_length = 0)
      : arith_(std::move(arith)),
        k_(dimension),
        l_(payload_length),
        kw_(Arith::storage_size(dimension)),
        lw_(Arith::storage_size(payload_length)),
        row_of_col_(dimension, -1),
        scratch_(kw_),
        scratch_payload_(lw_) {
    rows_.reserve(kw_ * std::min<std::size_t>(dimension, 64));
  }

  const Arith& arith() const noexcept { return arith_; }
  std::size_t dimension() const noexcept { return k_; }
  std::size_t payload_length() const noexcept { return l_; }
  std::size_t rank() const noexcept { return pivot_of_row_.size(); }
  bool full() const noexcept { return rank() == k_; }
  std::size_t storage_words() const noexcept { return kw_; }
  std::size_t payload_words() const noexcept { return lw_; }

  std::span<const word> row(std::size_t r) const noexcept { return {rows_.data() + r * kw_, kw_}; }
  std::span<const word> payload_row(std::size_t r) const noexcept { return {payloads_.data() + r * lw_, lw_}; }
  std::size_t pivot_of_row(std::size_t r) const noexcept { return pivot_of_row_[r]; }

  /// Pivot columns in increasing order.
  std::vector<std::size_t> pivots() const {
    std::vector<std::size_t> p(pivot_of_row_.begin(), pivot_of_row_.end());
    std::sort(p.begin(), p.end());
    return p;
  }

  /// Basis rows ordered by pivot column (the canonical RREF matrix).
  std::vector<std::vector<element_t>> basis() const {
    std::vector<std::vector<element_t>> out;
    for (auto c : pivots()) out.push_back(unpack(arith_, row(static_cast<std::size_t>(row_of_col_[c])), k_));
    return out;
  }

  /// Adds a vector to the span. Returns true iff the rank increased.
  bool insert(std::span<const word> coeffs, std::span<const word> payload = {}) {
    if (coeffs.size() != kw_) throw error(errc::length_mismatch, "coefficient vector has wrong length");
    if (l_ > 0 && payload.size() != lw_) throw error(errc::length_mismatch, "payload has wrong length");
    if (full()) return false;
    std::copy(coeffs.begin(), coeffs.end(), scratch_.begin());
    if (l_ > 0) std::copy(payload.begin(), payload.end(), scratch_payload_.begin());

    // Eliminate against existing pivots. Rows are zero on the other pivot
    // columns, so each subtraction leaves the remaining pivot entries intact.
    for (std::size_t r = 0; r < rank(); ++r) {
      const element_t c = Arith::get(scratch_, pivot_of_row_[r]);
      if (c == 0) continue;
      const element_t f = arith_.neg(c);
      arith_.axpy(scratch_, f, row(r));
      if (l_ > 0) arith_.axpy(scratch_payload_, f, payload_row(r));
    }
    const auto lead = Arith::leading(scratch_);
    if (!lead) return false;

    const element_t c = Arith::get(scratch_, *lead);
    if (c != 1) {
      const element_t s = arith_.inv(c);
      arith_.scale(scratch_, s);
      if (l_ > 0) arith_.scale(scratch_payload_, s);
    }
    // Back-substitute to clear the new pivot column from older rows.
    for (std::size_t r = 0; r < rank(); ++r) {
      std::span<word> target{rows_.data() + r * kw_, kw_};
      const element_t e = Arith::get(target, *lead);
      if (e == 0) continue;
      const element_t f = arith_.neg(e);
      arith_.axpy(target, f, scratch_);
      if (l_ > 0) arith_.axpy(std::span<word>{payloads_.data() + r * lw_, lw_}, f, scratch_payload_);
    }
    rows_.insert(rows_.end(), scratch_.begin(), scratch_.end());
    if (l_ > 0) payloads_.insert(payloads_.end(), scratch_payload_.begin(), scratch_payload_.end());
    row_of_col_[*lead] = static_cast<std::int32_t>(rank());
    pivot_of_row_.push_back(static_cast<std::uint32_t>(*lead));
    return true;
  }

  /// True iff some vector of the span has nonzero dot product with mu.
  bool knows(std::span<const word> mu) const {
    if (mu.size() != kw_) throw error(errc::length_mismatch, "dual vector has wrong length");
    for (std::size_t r = 0; r < rank(); ++r)
      if (arith_.dot(row(r), mu) != 0) return true;
    return false;
  }

  /// True iff v lies in the span.
  bool contains(std::span<const word> v) const {
    if (v.size() != kw_) throw error(errc::length_mismatch, "vector has wrong length");
    std::vector<word> tmp(v.begin(), v.end());
    for (std::size_t r = 0; r < rank(); ++r) {
      const element_t c = Arith::get(tmp, pivot_of_row_[r]);
      if (c != 0) arith_.axpy(tmp, arith_.neg(c), row(r));
    }
    return Arith::is_zero(tmp);
  }

  /// Writes a uniformly random element of the span (independent uniform
  /// coefficient per basis row) and the matching payload combination.
  template <class Rng>
  void sample(Rng& rng, std::span<word> coeffs_out, std::span<word> payload_out) const {
    std::fill(coeffs_out.begin(), coeffs_out.end(), word{0});
    std::fill(payload_out.begin(), payload_out.end(), word{0});
    const std::size_t n = rank();
    if constexpr (Arith::packed) {
      for (std::size_t base = 0; base < n; base += 64) {
        std::uint64_t bits = rng();
        const std::size_t end = std::min(n, base + 64);
        for (std::size_t r = base; r < end; ++r, bits >>= 1) {
          if ((bits & 1u) == 0) continue;
          arith_.axpy(coeffs_out, 1, row(r));
          if (l_ > 0) arith_.axpy(payload_out, 1, payload_row(r));
        }
      }
    } else {
      for (std::size_t r = 0; r < n; ++r) {
        const element_t c = arith_.random(rng);
        arith_.axpy(coeffs_out, c, row(r));
        if (l_ > 0) arith_.axpy(payload_out, c, payload_row(r));
      }
    }
  }

 private:
  Arith arith_;
  std::size_t k_;
  std::size_t l_;
  std::size_t kw_;
  std::size_t lw_;
  std::vector<word> rows_;
  std::vector<word> payloads_;
  std::vector<std::uint32_t> pivot_of_row_;
  std::vector<std::int32_t> row_of_col_;
  std::vector<word> scratch_;
  std::vector<word> scratch_payload_;
};

/// Per-node protocol state.
template <class Arith>
struct node_state {
  node_id id = 0;
  subspace<Arith> y;
  std::optional<std::size_t> decode_round;
  std::size_t innovative_count = 0;

  bool can_decode() const noexcept { return y.full(); }
  std::size_t rank() const noexcept { return y.rank(); }
  bool payload_mode() const noexcept { return y.payload_length() > 0; }
};

/// Ground-truth messages, one length-l vector per message index.
using message_set = std::vector<std::vector<element_t>>;

/// Node holding the standard basis vectors of its known (0-based) message
/// indices. With payload mode on, `messages` supplies their contents.
template <class Arith>
node_state<Arith> init_node(const Arith& arith, node_id id, std::size_t k, std::span<const std::size_t> known,
                            const message_set* messages = nullptr) {
  const std::size_t l = messages && !messages->empty() ? messages->front().size() : 0;
  if (messages && messages->size() != k) throw error(errc::length_mismatch, "need exactly k messages");
  node_state<Arith> s{id, subspace<Arith>(arith, k, l), std::nullopt, 0};
  storage_t<Arith> e(Arith::storage_size(k), 0);
  for (auto i : known) {
    if (i >= k) throw error(errc::index_out_of_range, "message index " + std::to_string(i) + " >= k");
    std::fill(e.begin(), e.end(), 0);
    Arith::set(e, i, 1);
    if (l > 0) {
      const auto payload = pack(arith, std::span<const element_t>((*messages)[i]));
      s.y.insert(e, payload);
    } else {
      s.y.insert(e);
    }
  }
  if (s.y.full()) s.decode_round = 0;
  return s;
}

template <class Arith, class Rng>
packet<Arith> sample_packet(const node_state<Arith>& s, Rng& rng) {
  packet<Arith> p{storage_t<Arith>(s.y.storage_words(), 0), storage_t<Arith>(s.y.payload_words(), 0)};
  s.y.sample(rng, p.mu, p.payload);
  return p;
}

/// Adds a packet to the node's span; records the decode round the first time
/// the rank reaches k. Returns whether the packet was innovative.
template <class Arith>
bool receive(node_state<Arith>& s, const packet<Arith>& p, std::size_t round = 0) {
  const bool innovative = s.y.insert(p.mu, p.payload);
  if (innovative) {
    ++s.innovative_count;
    if (s.y.full() && !s.decode_round) s.decode_round = round;
  }
  return innovative;
}

template <class Arith>
bool knows(const node_state<Arith>& s, std::span<const typename Arith::word_type> mu) {
  return s.y.knows(mu);
}

/// Recovers all k messages from a full-rank node in payload mode.
template <class Arith>
message_set decode(const node_state<Arith>& s) {
  if (!s.y.full()) throw error(errc::not_full_rank, "rank " + std::to_string(s.rank()) + " < k");
  if (!s.payload_mode()) throw error(errc::not_full_rank, "node carries no payloads");
  // Full-rank RREF rows are exactly the standard basis vectors.
  message_set out(s.y.dimension());
  for (std::size_t r = 0; r < s.rank(); ++r) {
    out[s.y.pivot_of_row(r)] = unpack(s.y.arith(), s.y.payload_row(r), s.y.payload_length());
  }
  return out;
}

/// Checks every stored payload row against its coefficient row applied to
/// the ground-truth messages.
template <class Arith>
bool payload_consistent(const node_state<Arith>& s, const message_set& messages) {
  if (!s.payload_mode()) return true;
  const auto& f = s.y.arith().field();
  const std::size_t l = s.y.payload_length();
  for (std::size_t r = 0; r < s.rank(); ++r) {
    const auto coeffs = unpack(s.y.arith(), s.y.row(r), s.y.dimension());
    const auto payload = unpack(s.y.arith(), s.y.payload_row(r), l);
    for (std::size_t j = 0; j < l; ++j) {
      element_t acc = 0;
      for (std::size_t i = 0; i < coeffs.size(); ++i) acc = f.add(acc, f.mul(coeffs[i], messages[i][j]));
      if (acc != payload[j]) return false;
    }
  }
  return true;
}

}  // namespace rlnc
