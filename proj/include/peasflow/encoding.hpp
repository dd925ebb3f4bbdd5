#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "peasflow/peas.hpp"

namespace peasflow {

/// Per-run table mapping node and consumer ids to compact 1-based indices.
/// Indices are assigned in first-encounter order and never change.
class IdInterner {
 public:
  std::uint32_t intern(const std::string& id);
  const std::string& name(std::uint32_t index) const;
  std::size_t size() const { return names_.size(); }

 private:
  std::map<std::string, std::uint32_t> index_;
  std::vector<std::string> names_;
};

void append_varint(std::vector<std::uint8_t>& out, std::uint64_t v);
std::uint64_t read_varint(const std::vector<std::uint8_t>& in,
                          std::size_t& pos);

/// Meta-data portion of an attribute (preference, categories, history) as
/// decoded from the canonical encoding. The value and name travel in the
/// base tuple and are not part of the meta-data overhead.
struct DecodedMetadata {
  std::shared_ptr<const PrivacyPreference> pp;
  std::set<NodeId> category;
  std::vector<HistoryEntry> history;
};

/// Canonical compact encoding of an attribute's privacy meta-data.
///
/// Layout, all counts and id references LEB128 varints, sets in
/// lexicographic id order:
///   [pp present: 1 octet]
///   [pp: consumer, ip.aip, ip.exc, jac.adc, jac.exc, jac.ip.aip,
///        jac.ip.exc, cdc — each as count + ids]     (only when present)
///   [category: count + ids]
///   [history count] [per entry: ac count + ids, rc count + ids]
std::vector<std::uint8_t> encode_metadata(const PeasAttribute& a,
                                          IdInterner& table);

/// Bit count of the canonical encoding: 8 x octet length.
std::size_t metadata_bits(const PeasAttribute& a, IdInterner& table);

DecodedMetadata decode_metadata(const std::vector<std::uint8_t>& octets,
                                const IdInterner& table);

}  // namespace peasflow
