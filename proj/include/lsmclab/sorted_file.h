#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lsmclab/bloom.h"
#include "lsmclab/device.h"
#include "lsmclab/entry.h"
#include "lsmclab/file_meta.h"
#include "lsmclab/options.h"
#include "lsmclab/status.h"

// On-disk layout of a sorted file, all integers little-endian:
//
//   [data page 0] ... [data page n-1]
//   [index block]   u32 count, then per page: u32 key_len, first key, u64 offset, u32 size
//   [filter block]  raw Bloom bits (absent when bits_per_key = 0)
//   [footer]        u64 index_off, u64 index_size, u64 filter_off, u64 filter_size,
//                   u32 probes, u32 num_pages, u64 entry_count, u32 crc32, u32 version,
//                   8-byte magic "LSMCLAB1"
//
// A data page holds exactly entries_per_page entries (the last one may hold
// fewer); entries never span pages. The crc covers every byte before it.

namespace lsmclab {

inline constexpr std::string_view kFooterMagic = "LSMCLAB1";
inline constexpr uint32_t kFormatVersion = 1;
inline constexpr size_t kFooterBytes = 64;

struct BuiltFile {
  std::string image;
  FileMeta meta;
};

// Streams entries (strictly increasing keys) into one file image.
class SortedFileBuilder {
 public:
  SortedFileBuilder(const TreeConfig& cfg, uint64_t file_id, Tick created_tick);

  void Add(const EntryView& e);

  bool empty() const { return entry_count_ == 0; }
  bool Full() const { return entry_count_ >= entries_per_file_; }
  uint64_t entry_count() const { return entry_count_; }

  BuiltFile Finish();

 private:
  void CutPage();

  uint32_t entries_per_page_;
  uint64_t entries_per_file_;
  BloomFilterBuilder filter_;
  FileMeta meta_;
  std::string image_;
  std::string index_;
  uint32_t index_count_ = 0;
  uint64_t page_start_ = 0;
  uint32_t page_entries_ = 0;
  uint64_t entry_count_ = 0;
  std::string last_key_;
};

struct Footer {
  BlockHandle index;
  BlockHandle filter;
  uint32_t filter_probes = 0;
  uint32_t num_pages = 0;
  uint64_t entry_count = 0;
  uint32_t crc = 0;
  uint32_t version = 0;
};

// Parses and checks the footer (magic, version, crc) of a full image.
StatusOr<Footer> ReadFooter(std::string_view image);

// Decoded blocks as held by the block cache.
class CachedBlock {
 public:
  virtual ~CachedBlock() = default;
  size_t charge() const { return raw_.data.size(); }

 protected:
  explicit CachedBlock(Slab raw) : raw_(std::move(raw)) {}
  Slab raw_;
};

class IndexBlock final : public CachedBlock {
 public:
  struct FencePointer {
    std::string_view first_key;
    BlockHandle page;
  };

  static StatusOr<std::shared_ptr<const IndexBlock>> Parse(Slab raw);

  // Page that may hold `key`: the last page whose first key is <= key.
  // Returns size() when key sorts before the first page.
  size_t FindPage(std::string_view key) const;
  // First page that may hold keys >= key.
  size_t LowerBoundPage(std::string_view key) const;

  size_t size() const { return fences_.size(); }
  const FencePointer& fence(size_t i) const { return fences_[i]; }

 private:
  explicit IndexBlock(Slab raw) : CachedBlock(std::move(raw)) {}
  std::vector<FencePointer> fences_;
};

class DataPage final : public CachedBlock {
 public:
  static StatusOr<std::shared_ptr<const DataPage>> Parse(Slab raw);

  // Entry with exactly this key, or nullptr.
  const EntryView* Find(std::string_view key) const;
  std::span<const EntryView> entries() const { return entries_; }

 private:
  explicit DataPage(Slab raw) : CachedBlock(std::move(raw)) {}
  std::vector<EntryView> entries_;
};

class FilterBlock final : public CachedBlock {
 public:
  FilterBlock(Slab raw, uint32_t probes)
      : CachedBlock(std::move(raw)), view_(raw_.data, probes) {}
  const BloomFilterView& view() const { return view_; }

 private:
  BloomFilterView view_;
};

// Sequential scan over every entry of a file image, used by compactions.
class SortedFileIterator {
 public:
  SortedFileIterator(Slab image, const FileMeta& meta);

  bool Valid() const { return valid_; }
  const EntryView& entry() const { return current_; }
  void Next();
  const Status& status() const { return status_; }

 private:
  Slab image_;
  std::string_view data_;
  EntryView current_;
  bool valid_ = false;
  Status status_;
};

}  // namespace lsmclab
