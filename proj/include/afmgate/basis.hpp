#pragma once

// Occupation-number bases for nu two-level atoms {|1>, |r>}.
// Bit i of a mask is atom i counted from the left end of the active chain.

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "afmgate/errors.hpp"

namespace afmgate {

using BasisState = std::uint32_t;

inline constexpr int max_basis_atoms = 24;

inline int rydberg_count(BasisState s) { return std::popcount(s); }

/// Eigenvalue of prod_i (|1_i><1_i| - |r_i><r_i|).
inline int parity_sign(BasisState s) { return (rydberg_count(s) & 1) ? -1 : 1; }

inline bool is_blockade_allowed(BasisState s) { return (s & (s >> 1)) == 0; }

/// Mirror image of the chain: atom i -> atom nu - 1 - i.
inline BasisState apply_inversion(BasisState s, int nu) {
  BasisState out = 0;
  for (int i = 0; i < nu; ++i)
    if (s >> i & 1u) out |= BasisState{1} << (nu - 1 - i);
  return out;
}

/// Leftmost atom first, '1' for a Rydberg excitation: |r11r> -> "1001".
inline std::string to_bitstring(BasisState s, int nu) {
  std::string out(static_cast<std::size_t>(nu), '0');
  for (int i = 0; i < nu; ++i)
    if (s >> i & 1u) out[static_cast<std::size_t>(i)] = '1';
  return out;
}

/// Accepts '0'/'1' or '1'/'r' alphabets ("r1r" == "101").
inline BasisState from_bitstring(std::string_view bits) {
  if (bits.size() > static_cast<std::size_t>(max_basis_atoms))
    throw SizeError("bitstring longer than the supported chain");
  BasisState s = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const char c = bits[i];
    if (c == 'r') {
      s |= BasisState{1} << i;
    } else if (c == '1') {
      const bool rydberg_alphabet = bits.find('r') != std::string_view::npos;
      if (!rydberg_alphabet) s |= BasisState{1} << i;
    } else if (c != '0') {
      throw DomainError("bitstring characters must be 0/1 or 1/r");
    }
  }
  return s;
}

/// Perfect alternating configuration |r1r1...> with ceil(nu/2) excitations.
inline BasisState afm_state(int nu) {
  BasisState s = 0;
  for (int i = 0; i < nu; i += 2) s |= BasisState{1} << i;
  return s;
}

enum class BasisKind { Blockade, Full };

class Basis {
 public:
  Basis(int nu, BasisKind kind) : nu_(nu), kind_(kind) {
    if (nu < 1 || nu > max_basis_atoms)
      throw SizeError("basis supports 1 <= nu <= " + std::to_string(max_basis_atoms));
    const BasisState end = BasisState{1} << nu;
    for (BasisState s = 0; s < end; ++s)
      if (kind == BasisKind::Full || is_blockade_allowed(s)) states_.push_back(s);
    index_.reserve(states_.size());
    for (std::size_t k = 0; k < states_.size(); ++k) index_.emplace(states_[k], k);
  }

  int nu() const { return nu_; }
  BasisKind kind() const { return kind_; }
  bool constrained() const { return kind_ == BasisKind::Blockade; }
  std::size_t size() const { return states_.size(); }
  const std::vector<BasisState>& states() const { return states_; }
  BasisState operator[](std::size_t k) const { return states_[k]; }

  bool contains(BasisState s) const { return index_.count(s) != 0; }

  std::size_t index_of(BasisState s) const {
    auto it = index_.find(s);
    if (it == index_.end()) throw DomainError("state not in basis: " + to_bitstring(s, nu_));
    return it->second;
  }

  /// Index of I|s_k>, a permutation of 0..size-1.
  std::vector<std::size_t> inversion_permutation() const {
    std::vector<std::size_t> perm(states_.size());
    for (std::size_t k = 0; k < states_.size(); ++k)
      perm[k] = index_of(apply_inversion(states_[k], nu_));
    return perm;
  }

 private:
  int nu_;
  BasisKind kind_;
  std::vector<BasisState> states_;
  std::unordered_map<BasisState, std::size_t> index_;
};

inline Basis build_blockade_basis(int nu) { return Basis(nu, BasisKind::Blockade); }
inline Basis build_full_basis(int nu) { return Basis(nu, BasisKind::Full); }

}  // namespace afmgate
