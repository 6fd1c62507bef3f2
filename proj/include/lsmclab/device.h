#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "lsmclab/status.h"

namespace lsmclab {

// A contiguous byte range read from a device. `storage` keeps the bytes alive;
// `data` may point into a larger shared buffer.
struct Slab {
  std::shared_ptr<const std::string> storage;
  std::string_view data;
};

struct DeviceStats {
  uint64_t bytes_written = 0;
  uint64_t bytes_read = 0;
  uint64_t files_written = 0;
  uint64_t files_removed = 0;
};

// Flat namespace of immutable files plus append-only logs. Sorted files are
// written once in full; the manifest is the only appended file.
class Device {
 public:
  virtual ~Device() = default;

  virtual Status WriteFile(const std::string& name, std::string contents) = 0;
  virtual Status AppendFile(const std::string& name, std::string_view data) = 0;
  virtual StatusOr<Slab> ReadFile(const std::string& name) = 0;
  virtual StatusOr<Slab> ReadRange(const std::string& name, uint64_t offset, uint64_t length) = 0;
  virtual Status RemoveFile(const std::string& name) = 0;
  virtual bool FileExists(const std::string& name) = 0;
  virtual std::vector<std::string> ListFiles() = 0;

  virtual DeviceStats stats() const = 0;
};

// Files held in process memory. Reads hand out views into the stored buffers
// without copying.
class MemDevice final : public Device {
 public:
  Status WriteFile(const std::string& name, std::string contents) override;
  Status AppendFile(const std::string& name, std::string_view data) override;
  StatusOr<Slab> ReadFile(const std::string& name) override;
  StatusOr<Slab> ReadRange(const std::string& name, uint64_t offset, uint64_t length) override;
  Status RemoveFile(const std::string& name) override;
  bool FileExists(const std::string& name) override;
  std::vector<std::string> ListFiles() override;
  DeviceStats stats() const override;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<std::string>> files_;
  DeviceStats stats_;
};

// Files in a host directory.
class PosixDevice final : public Device {
 public:
  static StatusOr<std::shared_ptr<PosixDevice>> Open(const std::filesystem::path& dir);

  Status WriteFile(const std::string& name, std::string contents) override;
  Status AppendFile(const std::string& name, std::string_view data) override;
  StatusOr<Slab> ReadFile(const std::string& name) override;
  StatusOr<Slab> ReadRange(const std::string& name, uint64_t offset, uint64_t length) override;
  Status RemoveFile(const std::string& name) override;
  bool FileExists(const std::string& name) override;
  std::vector<std::string> ListFiles() override;
  DeviceStats stats() const override;

 private:
  explicit PosixDevice(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::filesystem::path dir_;
  mutable std::mutex mu_;
  DeviceStats stats_;
};

// Wraps another device and fails writes on demand.
class FaultInjectionDevice final : public Device {
 public:
  explicit FaultInjectionDevice(std::shared_ptr<Device> base) : base_(std::move(base)) {}

  // The n-th write or append from now on (1-based) and every later one fails
  // until ClearFaults(). n = 0 clears.
  void FailWritesAfter(uint64_t n);
  void ClearFaults() { FailWritesAfter(0); }

  Status WriteFile(const std::string& name, std::string contents) override;
  Status AppendFile(const std::string& name, std::string_view data) override;
  StatusOr<Slab> ReadFile(const std::string& name) override { return base_->ReadFile(name); }
  StatusOr<Slab> ReadRange(const std::string& name, uint64_t offset, uint64_t length) override {
    return base_->ReadRange(name, offset, length);
  }
  Status RemoveFile(const std::string& name) override { return base_->RemoveFile(name); }
  bool FileExists(const std::string& name) override { return base_->FileExists(name); }
  std::vector<std::string> ListFiles() override { return base_->ListFiles(); }
  DeviceStats stats() const override { return base_->stats(); }

 private:
  bool ShouldFail();

  std::shared_ptr<Device> base_;
  std::mutex mu_;
  uint64_t countdown_ = 0;
  bool failing_ = false;
};

}  // namespace lsmclab
