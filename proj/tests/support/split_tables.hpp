#pragma once

// Published per-class (train, validation, test) counts for the 20/10/70
// split of three standard scenes.

#include <cstddef>
#include <string_view>
#include <vector>

namespace tables {

struct SplitRow {
  std::string_view name;
  std::size_t train;
  std::size_t validation;
  std::size_t test;

  std::size_t total() const { return train + validation + test; }
};

struct SplitTable {
  std::string_view scene;
  std::vector<SplitRow> rows;
  std::size_t train_total;
  std::size_t validation_total;
  std::size_t test_total;
};

inline const std::vector<SplitTable>& published_splits() {
  static const std::vector<SplitTable> t = {
      {"Indian Pines",
       {{"Alfalfa", 9, 4, 33},
        {"Corn-no", 285, 142, 1001},
        {"Corn-min", 166, 83, 581},
        {"Corn", 47, 23, 167},
        {"Grass/pasture", 96, 48, 339},
        {"Grass/trees", 146, 73, 511},
        {"Grass/pasture-mo", 5, 2, 21},
        {"Hay-win", 95, 47, 336},
        {"Oats", 4, 2, 14},
        {"Soy-no", 194, 97, 681},
        {"Soy-min", 491, 245, 1719},
        {"Soy-cle", 118, 59, 416},
        {"Wheat", 41, 20, 144},
        {"Woods", 253, 126, 886},
        {"BGTD", 77, 38, 271},
        {"SST", 18, 9, 66}},
       2045, 1018, 7186},
      {"University of Pavia",
       {{"Asphalt", 1326, 663, 4642},
        {"Meadows", 3729, 1864, 13056},
        {"Gravel", 419, 209, 1471},
        {"Trees", 612, 306, 2146},
        {"Painted-ms", 269, 134, 942},
        {"Bare Soil", 1005, 502, 3522},
        {"Bitumen", 266, 133, 931},
        {"Self-b Bricks", 736, 368, 2578},
        {"Shadows", 189, 94, 664}},
       8551, 4273, 29952},
      {"Salinas",
       {{"Brocoli-gw-1", 401, 200, 1408},
        {"Brocoli-gw-2", 745, 372, 2609},
        {"Fallow", 395, 197, 1384},
        {"Fallow-rp", 278, 139, 977},
        {"Fallow-sm", 535, 267, 1876},
        {"Stubble", 791, 395, 2773},
        {"Celery", 715, 357, 2507},
        {"Grapes-un", 2254, 1127, 7890},
        {"Soil-vd", 1240, 620, 4343},
        {"CSGW", 655, 327, 2296},
        {"Lettuce-ro-4wk", 213, 106, 749},
        {"Lettuce-ro-5wk", 385, 192, 1350},
        {"Lettuce-ro-6wk", 183, 91, 642},
        {"Lettuce-ro-7wk", 214, 107, 749},
        {"Vinyard-un", 1453, 726, 5089},
        {"Vinyard-vt", 361, 180, 1266}},
       10818, 5403, 37908},
  };
  return t;
}

}  // namespace tables
