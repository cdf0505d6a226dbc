#include "luk/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "luk/train.hpp"

namespace luk {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

NominalTable load_nominal_csv(const std::string& path, const std::string& class_column,
                              const std::string& positive_value) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path);
  NominalTable t;
  t.columns = split_csv_line(line);
  t.positive_value = positive_value;
  for (size_t i = 0; i < t.columns.size(); ++i)
    if (t.columns[i] == class_column) t.class_column = static_cast<int>(i);
  if (t.class_column < 0)
    throw std::runtime_error("unknown class column: " + class_column);
  t.vocabularies.resize(t.columns.size());
  std::vector<std::map<std::string, bool>> seen(t.columns.size());
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != t.columns.size())
      throw std::runtime_error("ragged csv row in " + path);
    for (size_t i = 0; i < cells.size(); ++i) {
      if (cells[i] == "?") continue;
      if (seen[i].emplace(cells[i], true).second) t.vocabularies[i].push_back(cells[i]);
    }
    t.rows.push_back(std::move(cells));
  }
  if (t.rows.empty()) throw std::runtime_error("csv has no data rows: " + path);
  return t;
}

Dataset binarize(const NominalTable& t) {
  Dataset d;
  d.provenance = "binarized";
  std::vector<std::pair<int, int>> feature_src;  // (column, vocab index)
  for (size_t c = 0; c < t.columns.size(); ++c) {
    if (static_cast<int>(c) == t.class_column) continue;
    for (size_t v = 0; v < t.vocabularies[c].size(); ++v) {
      d.feature_names.push_back(t.columns[c] + "=" + t.vocabularies[c][v]);
      feature_src.emplace_back(static_cast<int>(c), static_cast<int>(v));
    }
  }
  for (const auto& row : t.rows) {
    std::vector<double> x(feature_src.size(), 0.0);
    for (size_t f = 0; f < feature_src.size(); ++f) {
      auto [c, v] = feature_src[f];
      if (row[c] == t.vocabularies[c][v]) x[f] = 1.0;
    }
    d.rows.push_back(std::move(x));
    d.targets.push_back(row[t.class_column] == t.positive_value ? 1.0 : 0.0);
  }
  return d;
}

Dataset enrich_negative(const Dataset& d, double factor, double negative_target) {
  if (factor <= 0.0 || factor >= 1.0)
    throw std::invalid_argument("enrichment factor must be in (0,1)");
  Dataset out = d;
  out.provenance = "enriched";
  for (size_t r = 0; r < d.rows.size(); ++r) {
    std::vector<double> x = d.rows[r];
    for (double& v : x) v *= factor;
    out.rows.push_back(std::move(x));
    out.targets.push_back(negative_target);
  }
  return out;
}

Dataset dataset_from_table(const TruthTable& t) {
  Dataset d;
  d.provenance = "raw";
  for (int i = 0; i < t.arity; ++i) d.feature_names.push_back("x" + std::to_string(i));
  for (size_t i = 0; i < t.size(); ++i) {
    d.rows.push_back(t.point(i));
    d.targets.push_back(t.values[i]);
  }
  return d;
}

TruthTable table_from_dataset(const Dataset& d) {
  TruthTable t;
  t.arity = d.arity();
  size_t n = d.size();
  // Rows must form the full grid in mixed-radix order; infer n+1 from size.
  double root = std::pow(static_cast<double>(n), 1.0 / t.arity);
  int points = static_cast<int>(std::llround(root));
  size_t check = 1;
  for (int i = 0; i < t.arity; ++i) check *= points;
  if (points < 2 || check != n)
    throw std::invalid_argument("dataset is not a full truth subtable");
  t.resolution = points - 1;
  t.values = d.targets;
  for (size_t i = 0; i < n; ++i) {
    auto p = t.point(i);
    for (int j = 0; j < t.arity; ++j)
      if (std::abs(p[j] - d.rows[i][j]) > 1e-9)
        throw std::invalid_argument("dataset rows are not in grid order");
  }
  return t;
}

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path);
  Dataset d;
  d.provenance = "raw";
  auto header = split_csv_line(line);
  if (header.size() < 2) throw std::runtime_error("dataset csv needs features and a target");
  d.feature_names.assign(header.begin(), header.end() - 1);
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error("ragged csv row in " + path);
    std::vector<double> x(cells.size() - 1);
    for (size_t i = 0; i + 1 < cells.size(); ++i) x[i] = std::stod(cells[i]);
    d.rows.push_back(std::move(x));
    d.targets.push_back(std::stod(cells.back()));
  }
  if (d.rows.empty()) throw std::runtime_error("csv has no data rows: " + path);
  return d;
}

void write_dataset_csv(const Dataset& d, std::ostream& out) {
  for (const auto& name : d.feature_names) out << name << ",";
  out << "y\n";
  out << std::setprecision(12);
  for (size_t r = 0; r < d.rows.size(); ++r) {
    for (double v : d.rows[r]) out << v << ",";
    out << d.targets[r] << "\n";
  }
}

void save_dataset_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv: " + path);
  write_dataset_csv(d, out);
}

AccuracyReport classify_accuracy(const Evaluable& model, const Dataset& d, double threshold) {
  if (model.arity != d.arity()) throw std::invalid_argument("model/dataset arity mismatch");
  AccuracyReport r;
  r.total = d.size();
  for (size_t i = 0; i < d.size(); ++i) {
    bool predicted = model.fn(d.rows[i]) >= threshold;
    bool actual = d.targets[i] >= threshold;
    if (predicted != actual) ++r.misses;
  }
  r.accuracy = r.total ? 1.0 - static_cast<double>(r.misses) / r.total : 0.0;
  return r;
}

DerivedRecipe parse_recipe(std::istream& in) {
  DerivedRecipe r;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("recipe line without '=': " + line);
    std::string name = trim(line.substr(0, eq));
    if (name.empty()) throw std::runtime_error("recipe line without a name: " + line);
    std::vector<std::string> parts;
    std::stringstream rhs(line.substr(eq + 1));
    std::string tok;
    while (std::getline(rhs, tok, '|')) {
      tok = trim(tok);
      if (tok.empty()) throw std::runtime_error("empty feature reference in: " + line);
      parts.push_back(tok);
    }
    if (parts.empty()) throw std::runtime_error("recipe line without features: " + line);
    r.features.emplace_back(std::move(name), std::move(parts));
  }
  return r;
}

Dataset apply_recipe(const Dataset& d, const DerivedRecipe& r) {
  std::map<std::string, int> index;
  for (int i = 0; i < d.arity(); ++i) index.emplace(d.feature_names[i], i);
  std::vector<std::vector<int>> sources;
  Dataset out;
  out.provenance = d.provenance;
  for (const auto& [name, parts] : r.features) {
    out.feature_names.push_back(name);
    std::vector<int> src;
    for (const auto& p : parts) {
      auto it = index.find(p);
      if (it == index.end()) throw std::runtime_error("recipe references unknown feature: " + p);
      src.push_back(it->second);
    }
    sources.push_back(std::move(src));
  }
  out.targets = d.targets;
  for (const auto& row : d.rows) {
    std::vector<double> x;
    x.reserve(sources.size());
    for (const auto& src : sources) {
      double v = 0.0;
      for (int i : src) v = std::max(v, row[i]);
      x.push_back(v);
    }
    out.rows.push_back(std::move(x));
  }
  return out;
}

const char* const kMushroomRecipe =
    "A1 = bruises?=t\n"
    "A2 = odor=a | odor=l | odor=n\n"
    "A3 = odor=c\n"
    "A4 = ring.type=e\n"
    "A5 = spore.print.color=r\n"
    "A6 = population=c\n"
    "A7 = habitat=w\n"
    "A8 = habitat=g | habitat=m | habitat=u | habitat=d | habitat=p | habitat=l\n";

SelectionReport select_attributes(const Dataset& d, const TrainConfig& cfg) {
  RevEngOutcome outcome = reverse_engineer(d, cfg);
  SelectionReport r;
  r.model = outcome.best;
  r.model_mse = outcome.mse;
  r.converged = outcome.converged;
  const Layer& first = r.model.layers.front();
  for (int i = 0; i < d.arity(); ++i) {
    bool used = false;
    for (const Neuron& nr : first.neurons)
      if (nr.weights[i] != 0.0) used = true;
    if (used) {
      r.selected.push_back(i);
      r.selected_names.push_back(d.feature_names[i]);
    }
  }
  r.accuracy = classify_accuracy(as_evaluable(r.model), d);
  return r;
}

std::string SelectionReport::to_json() const {
  nlohmann::json doc;
  doc["model"] = nlohmann::json::parse(network_to_json(model));
  doc["model_mse"] = model_mse;
  doc["selected"] = selected;
  doc["selected_names"] = selected_names;
  doc["accuracy"] = {{"accuracy", accuracy.accuracy},
                     {"misses", accuracy.misses},
                     {"total", accuracy.total}};
  doc["converged"] = converged;
  return doc.dump(2) + "\n";
}

}  // namespace luk
