//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLRL_CHEM_SMILES_HPP_
#define MOLRL_CHEM_SMILES_HPP_

#include <cctype>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "molrl/chem/aromaticity.hpp"
#include "molrl/chem/mol_graph.hpp"

namespace molrl {

class SmilesError : public std::runtime_error {
 public:
  SmilesError(const std::string& msg, int position)
      : std::runtime_error(msg + " (at index " + std::to_string(position) + ")"),
        position_(position) {}

  int position() const { return position_; }

 private:
  int position_;
};

// Removes stereochemistry markers (@ inside brackets, / and \ bond
// directions) so that otherwise-supported inputs parse. Everything else is
// left untouched; the parser still rejects what remains if it is invalid.
inline std::string strip_stereo(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text)
    if (c != '@' && c != '/' && c != '\\') out.push_back(c);
  return out;
}

namespace detail {

struct PendingBond {
  bool present = false;  // explicit bond symbol seen since the last atom
  BondOrder order = BondOrder::Single;
  int position = 0;
};

struct RingSlot {
  int atom = -1;
  PendingBond bond;  // symbol written at the opening side, if any
};

// Bond order for an edge with no explicit symbol: aromatic between two
// aromatic atoms, single otherwise.
inline BondOrder default_order(bool arom_a, bool arom_b) {
  return arom_a && arom_b ? BondOrder::Aromatic : BondOrder::Single;
}

struct ParserState {
  MolGraph g;
  std::vector<bool> aromatic_atom;  // lowercase flag per atom
  std::vector<bool> bracket_atom;   // hydrogen count is as written, not default
  std::vector<int> branch_stack;
  std::map<int, RingSlot> open_rings;
  int prev = -1;
  PendingBond pending;

  int add_atom(Element e, bool aromatic, bool bracket, int h, int pos) {
    const int idx = g.add_atom(e, h);
    aromatic_atom.push_back(aromatic);
    bracket_atom.push_back(bracket);
    if (prev >= 0) {
      const BondOrder order =
          pending.present ? pending.order : default_order(aromatic_atom[prev], aromatic);
      if (g.bond_between(prev, idx) >= 0)
        throw SmilesError("duplicate bond between atoms", pos);
      g.add_bond(prev, idx, order);
    } else if (pending.present) {
      throw SmilesError("bond symbol without preceding atom", pending.position);
    }
    pending = PendingBond{};
    prev = idx;
    return idx;
  }

  // A digit (or %nn) either opens a ring slot or closes a matching one. Bond
  // symbols may be written on either side; both sides, if present, must
  // agree.
  void ring_digit(int digit, int pos) {
    if (prev < 0) throw SmilesError("ring closure before any atom", pos);
    auto it = open_rings.find(digit);
    if (it == open_rings.end()) {
      open_rings[digit] = RingSlot{prev, pending};
      pending = PendingBond{};
      return;
    }
    const RingSlot slot = it->second;
    open_rings.erase(it);
    if (slot.atom == prev) throw SmilesError("ring closure to the same atom", pos);
    if (slot.bond.present && pending.present && slot.bond.order != pending.order)
      throw SmilesError("conflicting bond symbols on ring closure", pos);
    BondOrder order;
    if (slot.bond.present)
      order = slot.bond.order;
    else if (pending.present)
      order = pending.order;
    else
      order = default_order(aromatic_atom[slot.atom], aromatic_atom[prev]);
    if (g.bond_between(slot.atom, prev) >= 0)
      throw SmilesError("duplicate bond between atoms", pos);
    g.add_bond(slot.atom, prev, order);
    pending = PendingBond{};
  }
};

}  // namespace detail

// Parses the supported SMILES subset: elements H/C/N/O/F (aromatic c/n/o),
// bracket atoms with an optional hydrogen count, bonds - = # :, branches,
// ring closures 1-9 and %nn. Charges, isotopes, stereo markers, wildcards,
// and dot-separated fragments are rejected with a position-tagged error.
inline MolGraph parse_smiles(std::string_view text) {
  detail::ParserState st;
  if (text.empty()) throw SmilesError("empty input", 0);

  std::size_t i = 0;
  const auto n = text.size();
  while (i < n) {
    const char c = text[i];
    const int pos = static_cast<int>(i);
    switch (c) {
      case 'C': case 'N': case 'O': case 'F': {
        if (c == 'C' && i + 1 < n && text[i + 1] == 'l')
          throw SmilesError("unsupported element 'Cl'", pos);
        Element e{};
        element_from_symbol(c, e);
        st.add_atom(e, false, false, 0, pos);
        ++i;
        break;
      }
      case 'c': case 'n': case 'o': {
        Element e{};
        element_from_symbol(static_cast<char>(std::toupper(c)), e);
        st.add_atom(e, true, false, 0, pos);
        ++i;
        break;
      }
      case 'H':
        throw SmilesError("explicit hydrogen must be written in brackets", pos);
      case 'b': case 's': case 'p': case 'B': case 'S': case 'P': case 'I': {
        std::string sym(1, c);
        if (c == 'B' && i + 1 < n && text[i + 1] == 'r') sym = "Br";
        if (c == 'S' && i + 1 < n && text[i + 1] == 'i') sym = "Si";
        throw SmilesError("unsupported element '" + sym + "'", pos);
      }
      case '[': {
        std::size_t j = i + 1;
        if (j >= n) throw SmilesError("unterminated bracket atom", pos);
        if (std::isdigit(static_cast<unsigned char>(text[j])))
          throw SmilesError("isotopes are unsupported", static_cast<int>(j));
        const char sym = text[j];
        Element e{};
        bool aromatic = false;
        if (sym == 'c' || sym == 'n' || sym == 'o') {
          element_from_symbol(static_cast<char>(std::toupper(sym)), e);
          aromatic = true;
        } else if (!element_from_symbol(sym, e)) {
          std::string s(1, sym);
          if (j + 1 < n && std::islower(static_cast<unsigned char>(text[j + 1])) &&
              text[j + 1] != 'h')
            s.push_back(text[j + 1]);
          throw SmilesError("unsupported element '" + s + "'", static_cast<int>(j));
        }
        ++j;
        int h = 0;
        if (j < n && text[j] == 'H') {
          h = 1;
          ++j;
          if (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) {
            h = text[j] - '0';
            ++j;
          }
        }
        if (j < n && (text[j] == '+' || text[j] == '-'))
          throw SmilesError("formal charges are unsupported", static_cast<int>(j));
        if (j < n && text[j] == '@')
          throw SmilesError("stereochemistry markers are unsupported (use --strip-stereo)",
                            static_cast<int>(j));
        if (j >= n || text[j] != ']')
          throw SmilesError("malformed bracket atom", static_cast<int>(j >= n ? n - 1 : j));
        if (e == Element::H && h > 0)
          throw SmilesError("hydrogen atom cannot carry implicit hydrogens", pos);
        st.add_atom(e, aromatic, true, h, pos);
        i = j + 1;
        break;
      }
      case '-': case '=': case '#': case ':': {
        if (st.pending.present) throw SmilesError("consecutive bond symbols", pos);
        st.pending.present = true;
        st.pending.position = pos;
        st.pending.order = c == '-'   ? BondOrder::Single
                           : c == '=' ? BondOrder::Double
                           : c == '#' ? BondOrder::Triple
                                      : BondOrder::Aromatic;
        ++i;
        break;
      }
      case '(': {
        if (st.prev < 0) throw SmilesError("branch before any atom", pos);
        if (st.pending.present) throw SmilesError("bond symbol before branch open", pos);
        st.branch_stack.push_back(st.prev);
        ++i;
        break;
      }
      case ')': {
        if (st.branch_stack.empty()) throw SmilesError("unmatched ')'", pos);
        if (st.pending.present) throw SmilesError("dangling bond symbol before ')'", pos);
        st.prev = st.branch_stack.back();
        st.branch_stack.pop_back();
        ++i;
        break;
      }
      case '%': {
        if (i + 2 >= n || !std::isdigit(static_cast<unsigned char>(text[i + 1])) ||
            !std::isdigit(static_cast<unsigned char>(text[i + 2])))
          throw SmilesError("malformed %nn ring closure", pos);
        st.ring_digit((text[i + 1] - '0') * 10 + (text[i + 2] - '0'), pos);
        i += 3;
        break;
      }
      case '.':
        throw SmilesError("dot-separated fragments are unsupported", pos);
      case '/': case '\\': case '@':
        throw SmilesError("stereochemistry markers are unsupported (use --strip-stereo)", pos);
      case '+':
        throw SmilesError("formal charges are unsupported", pos);
      default: {
        if (std::isdigit(static_cast<unsigned char>(c))) {
          st.ring_digit(c - '0', pos);
          ++i;
          break;
        }
        if (std::isspace(static_cast<unsigned char>(c)))
          throw SmilesError("whitespace inside SMILES", pos);
        throw SmilesError(std::string("unexpected character '") + c + "'", pos);
      }
    }
  }

  if (!st.branch_stack.empty()) throw SmilesError("unmatched '('", static_cast<int>(n) - 1);
  if (!st.open_rings.empty())
    throw SmilesError(
        "unmatched ring-closure digit " + std::to_string(st.open_rings.begin()->first),
        static_cast<int>(n) - 1);
  if (st.pending.present) throw SmilesError("dangling bond symbol", st.pending.position);

  // Atoms written without brackets receive the valence-table default:
  // whatever the bond orders leave unused (aromatic counts 1.5, rounded up).
  MolGraph& g = st.g;
  for (int v = 0; v < g.num_atoms(); ++v) {
    if (st.bracket_atom[v]) continue;
    const int used = g.bond_order_sum(v);
    g.atom(v).h_count = std::max(0, max_valence(g.atom(v).element) - used);
  }

  const std::vector<std::string> errs = g.validity_errors();
  if (!errs.empty()) throw SmilesError("invalid molecule: " + errs.front(), 0);
  if (!g.connected()) throw SmilesError("disconnected input", 0);
  // Aromatic systems must admit an alternating assignment; this rejects
  // inputs that abuse lowercase atoms outside genuine aromatic rings.
  if (g.has_aromatic_bonds()) {
    try {
      kekulize(g);
    } catch (const KekulizeError& e) {
      throw SmilesError(e.what(), 0);
    }
  }
  return g;
}

}  // namespace molrl

#endif  // MOLRL_CHEM_SMILES_HPP_
