#include "lsmclab/device.h"

#include <algorithm>
#include <fstream>
#include <system_error>

namespace lsmclab {

// ---------------------------------------------------------------- MemDevice

Status MemDevice::WriteFile(const std::string& name, std::string contents) {
  std::lock_guard<std::mutex> l(mu_);
  stats_.bytes_written += contents.size();
  stats_.files_written++;
  files_[name] = std::make_shared<std::string>(std::move(contents));
  return Status::OK();
}

Status MemDevice::AppendFile(const std::string& name, std::string_view data) {
  std::lock_guard<std::mutex> l(mu_);
  auto& f = files_[name];
  if (!f) {
    f = std::make_shared<std::string>();
  } else if (f.use_count() > 1) {
    // Copy-on-append keeps outstanding slabs of the old contents valid.
    f = std::make_shared<std::string>(*f);
  }
  f->append(data);
  stats_.bytes_written += data.size();
  return Status::OK();
}

StatusOr<Slab> MemDevice::ReadFile(const std::string& name) {
  std::lock_guard<std::mutex> l(mu_);
  auto it = files_.find(name);
  if (it == files_.end()) return Status::NotFound(name);
  stats_.bytes_read += it->second->size();
  return Slab{it->second, std::string_view(*it->second)};
}

StatusOr<Slab> MemDevice::ReadRange(const std::string& name, uint64_t offset, uint64_t length) {
  std::lock_guard<std::mutex> l(mu_);
  auto it = files_.find(name);
  if (it == files_.end()) return Status::NotFound(name);
  const std::string& s = *it->second;
  if (offset > s.size() || length > s.size() - offset) {
    return Status::IOError("read past end of " + name);
  }
  stats_.bytes_read += length;
  return Slab{it->second, std::string_view(s).substr(offset, length)};
}

Status MemDevice::RemoveFile(const std::string& name) {
  std::lock_guard<std::mutex> l(mu_);
  if (files_.erase(name) == 0) return Status::NotFound(name);
  stats_.files_removed++;
  return Status::OK();
}

bool MemDevice::FileExists(const std::string& name) {
  std::lock_guard<std::mutex> l(mu_);
  return files_.count(name) != 0;
}

std::vector<std::string> MemDevice::ListFiles() {
  std::lock_guard<std::mutex> l(mu_);
  std::vector<std::string> out;
  out.reserve(files_.size());
  for (const auto& [name, _] : files_) out.push_back(name);
  return out;
}

DeviceStats MemDevice::stats() const {
  std::lock_guard<std::mutex> l(mu_);
  return stats_;
}

// -------------------------------------------------------------- PosixDevice

StatusOr<std::shared_ptr<PosixDevice>> PosixDevice::Open(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) return Status::IOError("create " + dir.string() + ": " + ec.message());
  return std::shared_ptr<PosixDevice>(new PosixDevice(dir));
}

Status PosixDevice::WriteFile(const std::string& name, std::string contents) {
  const auto path = dir_ / name;
  const auto tmp = dir_ / (name + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) return Status::IOError("write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) return Status::IOError("rename " + path.string() + ": " + ec.message());
  std::lock_guard<std::mutex> l(mu_);
  stats_.bytes_written += contents.size();
  stats_.files_written++;
  return Status::OK();
}

Status PosixDevice::AppendFile(const std::string& name, std::string_view data) {
  std::ofstream out(dir_ / name, std::ios::binary | std::ios::app);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.flush();
  if (!out) return Status::IOError("append " + name);
  std::lock_guard<std::mutex> l(mu_);
  stats_.bytes_written += data.size();
  return Status::OK();
}

StatusOr<Slab> PosixDevice::ReadFile(const std::string& name) {
  std::ifstream in(dir_ / name, std::ios::binary);
  if (!in) return Status::NotFound(name);
  auto buf = std::make_shared<std::string>(std::istreambuf_iterator<char>(in),
                                           std::istreambuf_iterator<char>());
  {
    std::lock_guard<std::mutex> l(mu_);
    stats_.bytes_read += buf->size();
  }
  std::string_view view(*buf);
  return Slab{std::move(buf), view};
}

StatusOr<Slab> PosixDevice::ReadRange(const std::string& name, uint64_t offset, uint64_t length) {
  std::ifstream in(dir_ / name, std::ios::binary);
  if (!in) return Status::NotFound(name);
  in.seekg(static_cast<std::streamoff>(offset));
  auto buf = std::make_shared<std::string>(length, '\0');
  in.read(buf->data(), static_cast<std::streamsize>(length));
  if (static_cast<uint64_t>(in.gcount()) != length) {
    return Status::IOError("short read from " + name);
  }
  {
    std::lock_guard<std::mutex> l(mu_);
    stats_.bytes_read += length;
  }
  std::string_view view(*buf);
  return Slab{std::move(buf), view};
}

Status PosixDevice::RemoveFile(const std::string& name) {
  std::error_code ec;
  if (!std::filesystem::remove(dir_ / name, ec)) {
    return ec ? Status::IOError(ec.message()) : Status::NotFound(name);
  }
  std::lock_guard<std::mutex> l(mu_);
  stats_.files_removed++;
  return Status::OK();
}

bool PosixDevice::FileExists(const std::string& name) {
  std::error_code ec;
  return std::filesystem::exists(dir_ / name, ec);
}

std::vector<std::string> PosixDevice::ListFiles() {
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& e : std::filesystem::directory_iterator(dir_, ec)) {
    if (e.is_regular_file()) out.push_back(e.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

DeviceStats PosixDevice::stats() const {
  std::lock_guard<std::mutex> l(mu_);
  return stats_;
}

// ----------------------------------------------------- FaultInjectionDevice

void FaultInjectionDevice::FailWritesAfter(uint64_t n) {
  std::lock_guard<std::mutex> l(mu_);
  countdown_ = n;
  failing_ = false;
}

bool FaultInjectionDevice::ShouldFail() {
  std::lock_guard<std::mutex> l(mu_);
  if (failing_) return true;
  if (countdown_ == 0) return false;
  if (--countdown_ == 0) failing_ = true;
  return failing_;
}

Status FaultInjectionDevice::WriteFile(const std::string& name, std::string contents) {
  if (ShouldFail()) return Status::IOError("injected write failure: " + name);
  return base_->WriteFile(name, std::move(contents));
}

Status FaultInjectionDevice::AppendFile(const std::string& name, std::string_view data) {
  if (ShouldFail()) return Status::IOError("injected append failure: " + name);
  return base_->AppendFile(name, data);
}

}  // namespace lsmclab
