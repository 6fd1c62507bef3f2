#include "lsmclab/sorted_file.h"

#include <algorithm>
#include <cassert>

#include "lsmclab/coding.h"
#include "lsmclab/hash.h"

namespace lsmclab {

SortedFileBuilder::SortedFileBuilder(const TreeConfig& cfg, uint64_t file_id, Tick created_tick)
    : entries_per_page_(std::max<uint32_t>(1, cfg.entries_per_page())),
      entries_per_file_(std::max<uint64_t>(1, cfg.entries_per_file())),
      filter_(cfg.bits_per_key) {
  meta_.file_id = file_id;
  meta_.created_tick = created_tick;
  meta_.last_access_tick.store(created_tick);
}

void SortedFileBuilder::Add(const EntryView& e) {
  assert(entry_count_ == 0 || std::string_view(last_key_) < e.key);
  if (page_entries_ == 0) {
    page_start_ = image_.size();
    PutFixed32(&index_, static_cast<uint32_t>(e.key.size()));
    index_.append(e.key);
  }
  if (entry_count_ == 0) meta_.min_key.assign(e.key);
  last_key_.assign(e.key);

  EncodeEntry(&image_, e);
  filter_.AddKey(e.key);
  meta_.data_bytes += e.encoded_size();
  if (e.is_tombstone()) {
    meta_.tombstone_count++;
    if (!meta_.oldest_tombstone_tick || e.seqnum < *meta_.oldest_tombstone_tick) {
      meta_.oldest_tombstone_tick = e.seqnum;
    }
  }
  entry_count_++;
  if (++page_entries_ == entries_per_page_) CutPage();
}

void SortedFileBuilder::CutPage() {
  PutFixed64(&index_, page_start_);
  PutFixed32(&index_, static_cast<uint32_t>(image_.size() - page_start_));
  index_count_++;
  page_entries_ = 0;
}

BuiltFile SortedFileBuilder::Finish() {
  if (page_entries_ > 0) CutPage();
  meta_.max_key = last_key_;
  meta_.entry_count = entry_count_;
  meta_.num_pages = index_count_;

  meta_.index.offset = image_.size();
  PutFixed32(&image_, index_count_);
  image_.append(index_);
  meta_.index.size = image_.size() - meta_.index.offset;

  meta_.filter_probes = filter_.num_probes();
  meta_.filter.offset = image_.size();
  image_.append(filter_.Finish());
  meta_.filter.size = image_.size() - meta_.filter.offset;

  PutFixed64(&image_, meta_.index.offset);
  PutFixed64(&image_, meta_.index.size);
  PutFixed64(&image_, meta_.filter.offset);
  PutFixed64(&image_, meta_.filter.size);
  PutFixed32(&image_, meta_.filter_probes);
  PutFixed32(&image_, meta_.num_pages);
  PutFixed64(&image_, meta_.entry_count);
  PutFixed32(&image_, Crc32(image_));
  PutFixed32(&image_, kFormatVersion);
  image_.append(kFooterMagic);
  meta_.file_size = image_.size();

  BuiltFile out{std::move(image_), meta_};
  return out;
}

StatusOr<Footer> ReadFooter(std::string_view image) {
  if (image.size() < kFooterBytes) return Status::Corruption("file shorter than footer");
  const std::string_view tail = image.substr(image.size() - kFooterBytes);
  if (tail.substr(kFooterBytes - kFooterMagic.size()) != kFooterMagic) {
    return Status::Corruption("bad footer magic");
  }
  Decoder d(tail);
  Footer f;
  d.GetFixed64(&f.index.offset);
  d.GetFixed64(&f.index.size);
  d.GetFixed64(&f.filter.offset);
  d.GetFixed64(&f.filter.size);
  d.GetFixed32(&f.filter_probes);
  d.GetFixed32(&f.num_pages);
  d.GetFixed64(&f.entry_count);
  d.GetFixed32(&f.crc);
  d.GetFixed32(&f.version);
  if (f.version != kFormatVersion) return Status::Corruption("unsupported format version");
  const size_t crc_covered = image.size() - kFooterBytes + 48;
  if (Crc32(image.substr(0, crc_covered)) != f.crc) return Status::Corruption("crc mismatch");
  if (f.index.offset + f.index.size > image.size() ||
      f.filter.offset + f.filter.size > image.size()) {
    return Status::Corruption("block handle out of range");
  }
  return f;
}

StatusOr<std::shared_ptr<const IndexBlock>> IndexBlock::Parse(Slab raw) {
  std::shared_ptr<IndexBlock> block(new IndexBlock(std::move(raw)));
  Decoder d(block->raw_.data);
  uint32_t count = 0;
  if (!d.GetFixed32(&count)) return Status::Corruption("index block header");
  block->fences_.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    FencePointer fp;
    if (!d.GetLengthPrefixed(&fp.first_key) || !d.GetFixed64(&fp.page.offset)) {
      return Status::Corruption("index block entry");
    }
    uint32_t size = 0;
    if (!d.GetFixed32(&size)) return Status::Corruption("index block entry");
    fp.page.size = size;
    block->fences_.push_back(fp);
  }
  return std::shared_ptr<const IndexBlock>(std::move(block));
}

size_t IndexBlock::FindPage(std::string_view key) const {
  auto it = std::upper_bound(fences_.begin(), fences_.end(), key,
                             [](std::string_view k, const FencePointer& f) { return k < f.first_key; });
  if (it == fences_.begin()) return fences_.size();
  return static_cast<size_t>(it - fences_.begin()) - 1;
}

size_t IndexBlock::LowerBoundPage(std::string_view key) const {
  size_t p = FindPage(key);
  return p == fences_.size() ? 0 : p;
}

StatusOr<std::shared_ptr<const DataPage>> DataPage::Parse(Slab raw) {
  std::shared_ptr<DataPage> page(new DataPage(std::move(raw)));
  std::string_view in = page->raw_.data;
  while (!in.empty()) {
    EntryView e;
    if (!DecodeEntry(&in, &e)) return Status::Corruption("data page entry");
    page->entries_.push_back(e);
  }
  return std::shared_ptr<const DataPage>(std::move(page));
}

const EntryView* DataPage::Find(std::string_view key) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                             [](const EntryView& e, std::string_view k) { return e.key < k; });
  if (it == entries_.end() || it->key != key) return nullptr;
  return &*it;
}

SortedFileIterator::SortedFileIterator(Slab image, const FileMeta& meta)
    : image_(std::move(image)) {
  data_ = image_.data.substr(0, meta.index.offset);
  Next();
}

void SortedFileIterator::Next() {
  if (data_.empty()) {
    valid_ = false;
    return;
  }
  if (!DecodeEntry(&data_, &current_)) {
    status_ = Status::Corruption("truncated entry");
    valid_ = false;
    return;
  }
  valid_ = true;
}

}  // namespace lsmclab
