#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "luk/data.hpp"
#include "luk/train.hpp"

using namespace luk;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content) : path(name) {
    std::ofstream out(path);
    out << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("nominal csv loading") {
  TempFile f("nom_test.csv",
             "class,color,size\n"
             "e,red,big\n"
             "p,blue,small\n"
             "e,red,?\n");
  auto t = load_nominal_csv(f.path, "class", "e");
  CHECK(t.columns == std::vector<std::string>{"class", "color", "size"});
  CHECK(t.class_column == 0);
  REQUIRE(t.rows.size() == 3);
  CHECK(t.vocabularies[1] == std::vector<std::string>{"red", "blue"});
  CHECK(t.vocabularies[2] == std::vector<std::string>{"big", "small"});  // "?" excluded

  CHECK_THROWS(load_nominal_csv(f.path, "nope", "e"));
  TempFile ragged("nom_ragged.csv", "a,b\n1,2\n3\n");
  CHECK_THROWS(load_nominal_csv(ragged.path, "a", "1"));
  TempFile empty("nom_empty.csv", "");
  CHECK_THROWS(load_nominal_csv(empty.path, "a", "1"));
}

TEST_CASE("binarization") {
  TempFile f("bin_test.csv",
             "class,attr\n"
             "yes,a\n"
             "no,b\n"
             "yes,a\n"
             "no,?\n");
  auto t = load_nominal_csv(f.path, "class", "yes");
  auto d = binarize(t);
  CHECK(d.provenance == "binarized");
  CHECK(d.feature_names == std::vector<std::string>{"attr=a", "attr=b"});
  REQUIRE(d.rows.size() == 4);
  CHECK(d.rows[0] == std::vector<double>{1, 0});
  CHECK(d.rows[1] == std::vector<double>{0, 1});
  CHECK(d.rows[2] == std::vector<double>{1, 0});
  CHECK(d.rows[3] == std::vector<double>{0, 0});  // missing -> all zeros
  CHECK(d.targets == std::vector<double>{1, 0, 1, 0});
  // Non-missing rows keep exactly one feature hot per attribute.
  for (size_t r = 0; r < 3; ++r)
    CHECK(d.rows[r][0] + d.rows[r][1] == 1.0);
}

TEST_CASE("negative enrichment") {
  Dataset d;
  d.feature_names = {"A2", "A8"};
  d.rows = {{1, 1}};
  d.targets = {1};
  auto e = enrich_negative(d);
  CHECK(e.provenance == "enriched");
  REQUIRE(e.rows.size() == 2);
  CHECK(e.rows[0] == std::vector<double>{1, 1});
  CHECK(e.rows[1] == std::vector<double>{0.5, 0.5});
  CHECK(e.targets[1] == 0.0);
  CHECK_THROWS_AS(enrich_negative(d, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(enrich_negative(d, 0.0), std::invalid_argument);
}

TEST_CASE("dataset csv round trip") {
  Dataset d;
  d.feature_names = {"x0", "x1"};
  d.rows = {{0, 0.5}, {1, 0.25}};
  d.targets = {0.5, 1};
  std::string path = "ds_roundtrip.csv";
  save_dataset_csv(d, path);
  auto back = load_dataset_csv(path);
  std::remove(path.c_str());
  CHECK(back.feature_names == d.feature_names);
  CHECK(back.rows == d.rows);
  CHECK(back.targets == d.targets);
}

TEST_CASE("dataset/table conversion") {
  auto t = truth_subtable(*parse_formula("x0 * x1"), 2);
  auto d = dataset_from_table(t);
  CHECK(d.arity() == 2);
  CHECK(d.size() == 9);
  auto back = table_from_dataset(d);
  CHECK(back.resolution == 2);
  CHECK(back.values == t.values);

  d.rows.pop_back();
  d.targets.pop_back();
  CHECK_THROWS(table_from_dataset(d));
}

TEST_CASE("classification accuracy") {
  Dataset d;
  d.feature_names = {"x0"};
  d.rows = {{0.0}, {0.2}, {0.6}, {1.0}};
  d.targets = {0, 0, 1, 1};
  auto id = classify_accuracy(as_evaluable(parse_formula("x0")), d);
  CHECK(id.accuracy == 1.0);
  CHECK(id.misses == 0);
  auto neg = classify_accuracy(as_evaluable(parse_formula("!x0")), d);
  CHECK(neg.accuracy == 0.0);
  CHECK(neg.misses == 4);
  CHECK_THROWS(classify_accuracy(as_evaluable(parse_formula("x0 * x1")), d));
}

TEST_CASE("derived feature recipes") {
  std::stringstream ss("# comment\nA = f=a | f=b\nB = g=x\n");
  auto r = parse_recipe(ss);
  REQUIRE(r.features.size() == 2);
  CHECK(r.features[0].first == "A");
  CHECK(r.features[0].second == std::vector<std::string>{"f=a", "f=b"});

  Dataset d;
  d.feature_names = {"f=a", "f=b", "g=x"};
  d.rows = {{1, 0, 0}, {0, 1, 1}, {0, 0, 0}};
  d.targets = {1, 0, 1};
  auto out = apply_recipe(d, r);
  CHECK(out.feature_names == std::vector<std::string>{"A", "B"});
  CHECK(out.rows[0] == std::vector<double>{1, 0});
  CHECK(out.rows[1] == std::vector<double>{1, 1});
  CHECK(out.rows[2] == std::vector<double>{0, 0});
  CHECK(out.targets == d.targets);

  DerivedRecipe bad;
  bad.features = {{"Z", {"missing"}}};
  CHECK_THROWS(apply_recipe(d, bad));

  std::stringstream mush(kMushroomRecipe);
  auto m = parse_recipe(mush);
  REQUIRE(m.features.size() == 8);
  CHECK(m.features[1].second.size() == 3);  // A2 over three odor values
  CHECK(m.features[7].second.size() == 6);  // A8 over six habitats
}

TEST_CASE("attribute selection on synthetic data") {
  // Target equals feature 0; feature 1 is noise.
  Dataset d;
  d.feature_names = {"x0", "x1"};
  d.rows = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  d.targets = {0, 0, 1, 1};
  TrainConfig cfg;
  cfg.target_mse = 1e-3;
  cfg.max_iterations = 150;
  SelectionReport rep;
  bool ok = false;
  for (uint64_t seed = 1; seed <= 5 && !ok; ++seed) {
    cfg.rng_seed = seed;
    rep = select_attributes(d, cfg);
    ok = rep.converged && rep.selected == std::vector<int>{0};
  }
  CHECK(ok);
  CHECK(rep.accuracy.accuracy == 1.0);
  CHECK(rep.selected_names == std::vector<std::string>{"x0"});
  auto json = rep.to_json();
  CHECK(json.find("\"selected_names\"") != std::string::npos);
}
