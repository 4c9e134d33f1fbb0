#include <doctest.h>

#include "archopt/search_space.hpp"

using namespace archopt;

TEST_CASE("default grid shape") {
  const SearchSpace s = default_search_space();
  CHECK(s.size() == 1800);
  const auto all = s.enumerate();
  CHECK(all.size() == 1800);
  for (std::size_t i = 0; i < all.size(); i += 97) {
    const ArchitectureConfig a = s.at(i);
    CHECK(a.layers() == all[i].layers());
    CHECK(a.width() == all[i].width());
    CHECK(a.gqa() == all[i].gqa());
    CHECK(a.activation_rate() == all[i].activation_rate());
    REQUIRE(a.heads().has_value());
    CHECK(a.heads()->head_dim == 64);
  }
}

TEST_CASE("n_kv option 0 means full multi-head attention") {
  SearchSpace s = default_search_space();
  bool saw_mha = false;
  for (const auto& a : s.enumerate())
    if (a.gqa() == 1.0 && a.heads()->n_kv_heads == a.heads()->n_heads) saw_mha = true;
  CHECK(saw_mha);
}

TEST_CASE("precision presets") {
  CHECK(fp16_preset().bytes_weight == 2.0);
  CHECK(int8_preset().bytes_weight == 1.0);
  CHECK(precision_from_name("int8").name == "int8");
  CHECK_THROWS_AS(precision_from_name("fp4"), ValidationError);
  HardwareSpec hw;
  hw.peak_flops = 1e13;
  hw.bandwidth_bytes_per_s = 5e10;
  hw.memory_budget_bytes = 4e9;
  const HardwareSpec q = with_precision(hw, int8_preset());
  CHECK(q.bytes_weight == 1.0);
  CHECK(q.bytes_kv == 1.0);
  CHECK(q.peak_flops == hw.peak_flops);
}

TEST_CASE("snapping returns grid members and is idempotent on them") {
  const SearchSpace s = default_search_space();
  const auto all = s.enumerate();
  for (std::size_t i = 0; i < all.size(); i += 131) {
    const ArchitectureConfig snapped = snap_to_grid(all[i], s);
    CHECK(snapped.layers() == all[i].layers());
    CHECK(snapped.width() == all[i].width());
    CHECK(snapped.gqa() == all[i].gqa());
    CHECK(snapped.activation_rate() == all[i].activation_rate());
  }
  // An off-grid point lands on the log-nearest neighbors.
  const ArchitectureConfig off(15.0, 1100.0, 3.7, 0.9, 2.2);
  const ArchitectureConfig snapped = snap_to_grid(off, s);
  CHECK(snapped.layers() == 16.0);
  CHECK(snapped.width() == 1024.0);
  CHECK(snapped.ffn_ratio() == 4.0);
  CHECK(snapped.activation_rate() == 1.0);
}

TEST_CASE("space validation") {
  SearchSpace s = default_search_space();
  s.widths = {1000};  // not a multiple of head_dim
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = default_search_space();
  s.depths.clear();
  CHECK_THROWS_AS(s.validate(), ValidationError);
}
