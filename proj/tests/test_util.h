#pragma once

#include <gtest/gtest.h>

#include <map>
#include <memory>
#include <string>

#include "lsmclab/engine.h"
#include "lsmclab/strategy.h"
#include "lsmclab/workload.h"

namespace lsmclab::testing {

#define ASSERT_OK(expr)                                   \
  do {                                                    \
    const ::lsmclab::Status _s = (expr);                  \
    ASSERT_TRUE(_s.ok()) << _s.ToString();                \
  } while (0)

#define EXPECT_OK(expr)                                   \
  do {                                                    \
    const ::lsmclab::Status _s = (expr);                  \
    EXPECT_TRUE(_s.ok()) << _s.ToString();                \
  } while (0)

// 64-byte entries, 8 per page, 64 per buffer.
inline TreeConfig SmallTree(int T = 4) {
  TreeConfig c;
  c.size_ratio = T;
  c.buffer_bytes = 4096;
  c.page_bytes = 512;
  c.entry_bytes = 64;
  c.block_cache_bytes = 0;
  c.paranoid_checks = true;
  return c;
}

inline CompactionStrategy Preset(const std::string& name, int T = 4, Tick d_th = 2000) {
  PresetOptions po;
  po.size_ratio = T;
  po.delete_persistence_threshold = d_th;
  auto s = MakePreset(name, po);
  EXPECT_TRUE(s.ok()) << s.status().ToString();
  return *s;
}

inline std::unique_ptr<Engine> OpenEngine(const TreeConfig& tree, const CompactionStrategy& s,
                                          std::shared_ptr<Device> dev = nullptr) {
  EngineOptions o;
  o.tree = tree;
  o.strategy = s;
  for (const auto& t : s.triggers) {
    if (t.kind == Trigger::Kind::kTombstoneTTL) o.tree.delete_persistence_threshold = static_cast<Tick>(t.value);
  }
  if (!dev) dev = std::make_shared<MemDevice>();
  auto e = Engine::Open(o, std::move(dev));
  EXPECT_TRUE(e.ok()) << e.status().ToString();
  return e.ok() ? std::move(e).value() : nullptr;
}

// 16-digit key and a 30-byte value, matching 64-byte entries.
inline std::string Key(uint64_t i) { return EncodeKey(i, 16); }
inline std::string Value(uint64_t i, uint64_t version = 0) {
  std::string v = std::to_string(i) + "/" + std::to_string(version);
  v.resize(64 - 16 - 16 - 2, '.');
  return v;
}

using Oracle = std::map<std::string, std::string>;

// Live pairs of the whole engine, via a full scan.
inline std::vector<KeyValue> Contents(Engine* e) {
  auto all = e->Scan("", std::string(1, '\xff'));
  EXPECT_TRUE(all.ok()) << all.status().ToString();
  return all.ok() ? *all : std::vector<KeyValue>{};
}

inline std::vector<KeyValue> ToPairs(const Oracle& o) { return {o.begin(), o.end()}; }

}  // namespace lsmclab::testing
