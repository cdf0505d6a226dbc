#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "luk/rewrite.hpp"

namespace luk {

struct NominalTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> vocabularies;  // per column, "?" excluded
  std::vector<std::vector<std::string>> rows;
  int class_column = -1;
  std::string positive_value;
};

/// Vocabularies are inferred in first-occurrence order; "?" marks a missing
/// cell and never enters a vocabulary.
NominalTable load_nominal_csv(const std::string& path, const std::string& class_column,
                              const std::string& positive_value);

struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> rows;  // entries in [0,1]
  std::vector<double> targets;
  std::string provenance;  // raw | binarized | enriched

  int arity() const { return static_cast<int>(feature_names.size()); }
  size_t size() const { return rows.size(); }
};

/// One 0/1 feature per observed (attribute, value) pair, named `attr=value`;
/// a missing cell yields 0 in all of its attribute's features.
Dataset binarize(const NominalTable& t);

/// Appends, per original row, a copy with features scaled by factor and the
/// negative target; originals stay first and unchanged.
Dataset enrich_negative(const Dataset& d, double factor = 0.5, double negative_target = 0.0);

Dataset dataset_from_table(const TruthTable& t);
TruthTable table_from_dataset(const Dataset& d);

Dataset load_dataset_csv(const std::string& path);
void write_dataset_csv(const Dataset& d, std::ostream& out);
void save_dataset_csv(const Dataset& d, const std::string& path);

struct AccuracyReport {
  double accuracy = 0.0;
  size_t misses = 0;
  size_t total = 0;
};

/// Prediction = output >= threshold; target counted positive the same way.
AccuracyReport classify_accuracy(const Evaluable& model, const Dataset& d,
                                 double threshold = 0.5);

/// Derived-feature recipes: each line `NAME = feat | feat | ...` defines a
/// new feature as the maximum of existing ones. Lines starting with # are
/// comments.
struct DerivedRecipe {
  std::vector<std::pair<std::string, std::vector<std::string>>> features;
};

DerivedRecipe parse_recipe(std::istream& in);
Dataset apply_recipe(const Dataset& d, const DerivedRecipe& r);

/// The shipped Mushroom A1..A8 proposition recipe over `attr=value` features.
extern const char* const kMushroomRecipe;

struct TrainConfig;  // train.hpp

struct SelectionReport {
  Network model;
  double model_mse = 0.0;
  std::vector<int> selected;  // feature indices with nonzero input weights
  std::vector<std::string> selected_names;
  AccuracyReport accuracy;
  bool converged = true;

  std::string to_json() const;
};

SelectionReport select_attributes(const Dataset& d, const TrainConfig& cfg);

}  // namespace luk
