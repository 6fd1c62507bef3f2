#include "lsmclab/entry.h"

#include "lsmclab/coding.h"

namespace lsmclab {

void EncodeEntry(std::string* dst, const EntryView& e) {
  PutFixed64(dst, (e.seqnum << 8) | static_cast<uint64_t>(e.kind));
  PutFixed32(dst, static_cast<uint32_t>(e.key.size()));
  PutFixed32(dst, static_cast<uint32_t>(e.value.size()));
  dst->append(e.key);
  dst->append(e.value);
}

bool DecodeEntry(std::string_view* in, EntryView* out) {
  if (in->size() < kEntryHeaderBytes) return false;
  const char* p = in->data();
  const uint64_t packed = DecodeFixed64(p);
  const uint32_t klen = DecodeFixed32(p + 8);
  const uint32_t vlen = DecodeFixed32(p + 12);
  const size_t total = kEntryHeaderBytes + size_t{klen} + vlen;
  if (in->size() < total) return false;
  const auto kind = static_cast<uint8_t>(packed & 0xff);
  if (kind != static_cast<uint8_t>(EntryKind::kPut) &&
      kind != static_cast<uint8_t>(EntryKind::kTombstone)) {
    return false;
  }
  out->seqnum = packed >> 8;
  out->kind = static_cast<EntryKind>(kind);
  out->key = std::string_view(p + kEntryHeaderBytes, klen);
  out->value = std::string_view(p + kEntryHeaderBytes + klen, vlen);
  in->remove_prefix(total);
  return true;
}

}  // namespace lsmclab
