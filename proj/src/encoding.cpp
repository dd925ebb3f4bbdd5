#include "peasflow/encoding.hpp"

namespace peasflow {

std::uint32_t IdInterner::intern(const std::string& id) {
  auto it = index_.find(id);
  if (it != index_.end()) return it->second;
  names_.push_back(id);
  const auto idx = static_cast<std::uint32_t>(names_.size());  // 1-based
  index_.emplace(id, idx);
  return idx;
}

const std::string& IdInterner::name(std::uint32_t index) const {
  if (index == 0 || index > names_.size())
    throw PeasError(ErrorCode::ParseError,
                    "id index " + std::to_string(index) + " not in table");
  return names_[index - 1];
}

void append_varint(std::vector<std::uint8_t>& out, std::uint64_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<std::uint8_t>(v) | 0x80);
    v >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint64_t read_varint(const std::vector<std::uint8_t>& in,
                          std::size_t& pos) {
  std::uint64_t v = 0;
  int shift = 0;
  while (true) {
    if (pos >= in.size())
      throw PeasError(ErrorCode::ParseError, "truncated varint");
    const std::uint8_t b = in[pos++];
    v |= static_cast<std::uint64_t>(b & 0x7f) << shift;
    if (!(b & 0x80)) return v;
    shift += 7;
    if (shift > 63)
      throw PeasError(ErrorCode::ParseError, "varint overflow");
  }
}

namespace {

template <typename SetT>
void encode_id_set(std::vector<std::uint8_t>& out, const SetT& ids,
                   IdInterner& table) {
  append_varint(out, ids.size());
  for (const auto& id : ids) append_varint(out, table.intern(id));
}

std::set<std::string> decode_id_set(const std::vector<std::uint8_t>& in,
                                    std::size_t& pos,
                                    const IdInterner& table) {
  std::set<std::string> out;
  const std::uint64_t n = read_varint(in, pos);
  for (std::uint64_t i = 0; i < n; ++i)
    out.insert(table.name(static_cast<std::uint32_t>(read_varint(in, pos))));
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_metadata(const PeasAttribute& a,
                                          IdInterner& table) {
  std::vector<std::uint8_t> out;
  out.push_back(a.pp ? 1 : 0);
  if (a.pp) {
    encode_id_set(out, a.pp->consumer, table);
    encode_id_set(out, a.pp->ip.aip, table);
    encode_id_set(out, a.pp->ip.exc, table);
    encode_id_set(out, a.pp->jac.adc, table);
    encode_id_set(out, a.pp->jac.exc, table);
    encode_id_set(out, a.pp->jac.ip.aip, table);
    encode_id_set(out, a.pp->jac.ip.exc, table);
    encode_id_set(out, a.pp->cdc, table);
  }
  encode_id_set(out, a.category, table);
  append_varint(out, a.history.size());
  for (const auto& he : a.history) {
    encode_id_set(out, he.ac, table);
    encode_id_set(out, he.rc, table);
  }
  return out;
}

std::size_t metadata_bits(const PeasAttribute& a, IdInterner& table) {
  return encode_metadata(a, table).size() * 8;
}

DecodedMetadata decode_metadata(const std::vector<std::uint8_t>& octets,
                                const IdInterner& table) {
  DecodedMetadata meta;
  std::size_t pos = 0;
  if (octets.empty())
    throw PeasError(ErrorCode::ParseError, "empty meta-data encoding");
  const bool has_pp = octets[pos++] != 0;
  if (has_pp) {
    PrivacyPreference pp;
    pp.consumer = decode_id_set(octets, pos, table);
    pp.ip.aip = decode_id_set(octets, pos, table);
    pp.ip.exc = decode_id_set(octets, pos, table);
    pp.jac.adc = decode_id_set(octets, pos, table);
    pp.jac.exc = decode_id_set(octets, pos, table);
    pp.jac.ip.aip = decode_id_set(octets, pos, table);
    pp.jac.ip.exc = decode_id_set(octets, pos, table);
    pp.cdc = decode_id_set(octets, pos, table);
    meta.pp = std::make_shared<const PrivacyPreference>(std::move(pp));
  }
  meta.category = decode_id_set(octets, pos, table);
  const std::uint64_t n = read_varint(octets, pos);
  for (std::uint64_t i = 0; i < n; ++i) {
    HistoryEntry he;
    he.ac = decode_id_set(octets, pos, table);
    he.rc = decode_id_set(octets, pos, table);
    meta.history.push_back(std::move(he));
  }
  if (pos != octets.size())
    throw PeasError(ErrorCode::ParseError, "trailing bytes in meta-data");
  return meta;
}

}  // namespace peasflow
