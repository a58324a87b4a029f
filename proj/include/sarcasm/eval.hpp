#pragma once

// Binary F1 on the sarcastic class and the results table.

#include <algorithm>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "sarcasm/common/error.hpp"
#include "sarcasm/common/format.hpp"
#include "sarcasm/corpus.hpp"

namespace sarcasm {

struct RunResult {
  std::string dataset;
  std::string model;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  double precision() const { return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp); }
  double recall() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn); }
};

// Counts and F1 with `positive` as the positive class. An undefined precision
// or recall counts as 0, so F1 is 0 whenever TP is 0.
inline RunResult f1_from_labels(const std::vector<Label>& predicted, const std::vector<Label>& gold,
                                Label positive = Label::sarcastic) {
  if (predicted.size() != gold.size()) throw DomainError("f1: prediction and gold lengths differ");
  RunResult r;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool p = predicted[i] == positive;
    const bool g = gold[i] == positive;
    if (p && g) ++r.tp;
    else if (p) ++r.fp;
    else if (g) ++r.fn;
    else ++r.tn;
  }
  const double precision = r.precision();
  const double recall = r.recall();
  r.f1 = (r.tp == 0 || precision + recall == 0.0) ? 0.0 : 2.0 * precision * recall / (precision + recall);
  return r;
}

// Aligns predictions to gold labels by tweet id; both sides must carry the
// same ids.
inline RunResult f1_score(const std::vector<std::pair<std::string, Label>>& predictions,
                          const std::vector<std::pair<std::string, Label>>& golds,
                          Label positive = Label::sarcastic) {
  if (predictions.empty() || predictions.size() != golds.size()) {
    throw DomainError("f1_score: need equal, non-zero numbers of predictions and gold labels");
  }
  std::unordered_map<std::string, Label> gold_by_id;
  for (const auto& [id, label] : golds) gold_by_id.emplace(id, label);
  std::vector<Label> predicted;
  std::vector<Label> gold;
  std::set<std::string> seen;
  for (const auto& [id, label] : predictions) {
    const auto it = gold_by_id.find(id);
    if (it == gold_by_id.end() || !seen.insert(id).second) {
      throw DomainError("f1_score: prediction id '" + id + "' does not align with the gold labels");
    }
    predicted.push_back(label);
    gold.push_back(it->second);
  }
  return f1_from_labels(predicted, gold, positive);
}

inline std::vector<std::pair<std::string, Label>> gold_labels(const LabeledDataset& dataset) {
  std::vector<std::pair<std::string, Label>> out;
  for (const auto& t : dataset.tweets) out.emplace_back(t.id, t.label.value());
  return out;
}

inline const std::vector<std::string>& table_model_order() {
  static const std::vector<std::string> order{
      "SIARN",      "EX-CASCADE", "EX-W-CASCADE", "EX-ED", "EX-SUMMARY",
      "IN-CASCADE", "IN-W-CASCADE", "IN-ED",      "IN-SUMMARY"};
  return order;
}

inline std::string model_group(const std::string& model) {
  if (model.starts_with("EX-")) return "exclusive";
  if (model.starts_with("IN-")) return "inclusive";
  return "baseline";
}

struct ResultsTable {
  std::string csv;
  std::string text;
};

// Rows follow the baseline, exclusive, inclusive order; one column per
// dataset in first-appearance order. Within the exclusive and inclusive
// groups the best F1 per dataset carries a '*' (ties all flagged). Values
// are rendered with three decimals in both formats.
inline ResultsTable results_table(const std::vector<RunResult>& results) {
  std::vector<std::string> datasets;
  std::map<std::pair<std::string, std::string>, double> cell;
  for (const auto& r : results) {
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) datasets.push_back(r.dataset);
    cell[{r.model, r.dataset}] = r.f1;
  }
  std::vector<std::string> models;
  for (const auto& m : table_model_order()) {
    if (std::any_of(results.begin(), results.end(), [&](const auto& r) { return r.model == m; })) models.push_back(m);
  }
  for (const auto& r : results) {
    if (std::find(models.begin(), models.end(), r.model) == models.end()) models.push_back(r.model);
  }

  std::map<std::pair<std::string, std::string>, double> best;  // (group, dataset)
  for (const auto& [key, f1] : cell) {
    const auto group = model_group(key.first);
    if (group == "baseline") continue;
    const auto slot = std::make_pair(group, key.second);
    if (!best.contains(slot) || f1 > best[slot]) best[slot] = f1;
  }

  auto render = [&](const std::string& model, const std::string& dataset) -> std::string {
    const auto it = cell.find({model, dataset});
    if (it == cell.end()) return "-";
    std::string value = format_fixed(it->second, 3);
    const auto group = model_group(model);
    const auto b = best.find({group, dataset});
    // Flag on the rendered value so ties at three decimals agree with what is shown.
    if (b != best.end() && format_fixed(b->second, 3) == value) value += "*";
    return value;
  };

  std::ostringstream csv;
  csv << "group,model";
  for (const auto& d : datasets) csv << ',' << d;
  csv << '\n';
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"group", "model"});
  for (const auto& d : datasets) rows.back().push_back(d);
  for (const auto& m : models) {
    std::vector<std::string> row{model_group(m), m};
    for (const auto& d : datasets) row.push_back(render(m, d));
    csv << row[0] << ',' << row[1];
    for (std::size_t k = 2; k < row.size(); ++k) csv << ',' << row[k];
    csv << '\n';
    rows.push_back(std::move(row));
  }

  std::vector<std::size_t> widths(rows.front().size(), 0);
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) widths[k] = std::max(widths[k], row[k].size());
  }
  std::ostringstream text;
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      text << row[k] << std::string(widths[k] - row[k].size(), ' ');
      text << (k + 1 < row.size() ? "  " : "");
    }
    text << '\n';
  }
  return {csv.str(), text.str()};
}

inline void write_results_csv(std::ostream& out, const std::vector<RunResult>& results) {
  out << "dataset,model,f1,tp,fp,fn,tn\n";
  for (const auto& r : results) {
    out << r.dataset << ',' << r.model << ',' << format_double(r.f1, 9) << ',' << r.tp << ',' << r.fp
        << ',' << r.fn << ',' << r.tn << '\n';
  }
}

inline std::vector<RunResult> read_results_csv(std::istream& in) {
  std::vector<RunResult> out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line_number == 1 || line.empty()) continue;
    std::istringstream fields(line);
    RunResult r;
    std::string f1, tp, fp, fn, tn;
    if (!std::getline(fields, r.dataset, ',') || !std::getline(fields, r.model, ',') ||
        !std::getline(fields, f1, ',') || !std::getline(fields, tp, ',') || !std::getline(fields, fp, ',') ||
        !std::getline(fields, fn, ',') || !std::getline(fields, tn, ',')) {
      throw ParseError("results row needs 7 fields", line_number);
    }
    try {
      r.f1 = std::stod(f1);
      r.tp = std::stoul(tp);
      r.fp = std::stoul(fp);
      r.fn = std::stoul(fn);
      r.tn = std::stoul(tn);
    } catch (const std::exception&) {
      throw ParseError("non-numeric results field", line_number);
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace sarcasm
