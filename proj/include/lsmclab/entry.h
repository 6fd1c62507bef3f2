#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "lsmclab/status.h"

namespace lsmclab {

using SequenceNumber = uint64_t;
using Tick = uint64_t;

enum class EntryKind : uint8_t {
  kPut = 1,
  kTombstone = 2,
};

// seq+kind word, key length, value length.
inline constexpr size_t kEntryHeaderBytes = 16;

// Non-owning view of an encoded entry. Used on the merge and lookup paths so
// that no allocation happens per entry.
struct EntryView {
  std::string_view key;
  std::string_view value;
  SequenceNumber seqnum = 0;
  EntryKind kind = EntryKind::kPut;

  bool is_tombstone() const { return kind == EntryKind::kTombstone; }
  size_t encoded_size() const { return kEntryHeaderBytes + key.size() + value.size(); }
};

struct Entry {
  std::string key;
  std::string value;
  SequenceNumber seqnum = 0;
  EntryKind kind = EntryKind::kPut;

  Entry() = default;
  Entry(std::string k, std::string v, SequenceNumber s, EntryKind kd)
      : key(std::move(k)), value(std::move(v)), seqnum(s), kind(kd) {}
  explicit Entry(const EntryView& v)
      : key(v.key), value(v.value), seqnum(v.seqnum), kind(v.kind) {}

  EntryView view() const { return EntryView{key, value, seqnum, kind}; }
  bool is_tombstone() const { return kind == EntryKind::kTombstone; }
  size_t encoded_size() const { return kEntryHeaderBytes + key.size() + value.size(); }

  friend bool operator==(const Entry&, const Entry&) = default;
};

inline size_t EncodedEntrySize(size_t key_len, size_t value_len) {
  return kEntryHeaderBytes + key_len + value_len;
}

// Appends the fixed little-endian framing of one entry to dst.
void EncodeEntry(std::string* dst, const EntryView& e);

// Decodes one entry from the front of *in and advances it. Views point into
// the caller's buffer.
bool DecodeEntry(std::string_view* in, EntryView* out);

// Internal ordering: key ascending, then newest (largest seqnum) first.
inline int CompareInternal(const EntryView& a, const EntryView& b) {
  int c = a.key.compare(b.key);
  if (c != 0) return c;
  if (a.seqnum > b.seqnum) return -1;
  if (a.seqnum < b.seqnum) return 1;
  return 0;
}

}  // namespace lsmclab
