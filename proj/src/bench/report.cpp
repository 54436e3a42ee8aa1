#include "mgdil/bench/report.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <tuple>

#include "mgdil/util/csv.hpp"
#include "mgdil/util/digest.hpp"

namespace mgdil::bench {

std::vector<DistributionRow> distribution_report(const std::vector<LabeledSummary>& entries) {
  using Cell = std::pair<std::string, int>;
  std::map<Cell, std::size_t> users;
  std::map<std::tuple<std::string, int, std::size_t, std::string>, std::size_t> counts;
  for (const auto& e : entries) {
    const int label = static_cast<int>(e.label);
    ++users[{e.dataset_id, label}];
    for (std::size_t d = 0; d < summary::kDimensions.size(); ++d) {
      // Repeated labels in one dimension still count once for the user.
      std::vector<std::string> seen;
      for (const auto& c : e.summary.labels[d]) {
        if (std::find(seen.begin(), seen.end(), c) != seen.end()) continue;
        seen.push_back(c);
        ++counts[{e.dataset_id, label, d, c}];
      }
    }
  }

  std::vector<DistributionRow> rows;
  for (const auto& [cell, n] : users) {
    for (std::size_t d = 0; d < summary::kDimensions.size(); ++d) {
      const auto dim = summary::kDimensions[d];
      for (const auto& c : summary::vocabulary(dim)) {
        DistributionRow r;
        r.dataset_id = cell.first;
        r.label = static_cast<ingest::Label>(cell.second);
        r.dimension = dim;
        r.category = c;
        r.users = n;
        auto it = counts.find({cell.first, cell.second, d, c});
        r.count = it == counts.end() ? 0 : it->second;
        r.frequency = static_cast<double>(r.count) / static_cast<double>(n);
        rows.push_back(std::move(r));
      }
    }
  }
  return rows;
}

std::string distribution_csv(const std::vector<DistributionRow>& rows) {
  std::ostringstream out;
  out << "dataset_id,label,dimension,category,count,users,frequency\n";
  out.precision(6);
  out << std::fixed;
  for (const auto& r : rows) {
    out << csv::escape(r.dataset_id) << ',' << ingest::label_name(r.label) << ','
        << summary::dimension_name(r.dimension) << ',' << csv::escape(r.category) << ',' << r.count << ','
        << r.users << ',' << r.frequency << '\n';
  }
  return out.str();
}

ManifestFile manifest_file(const std::filesystem::path& path) {
  return {path, digest::git_blob_id_of_file(path)};
}

nlohmann::json run_manifest(const std::string& command, const nlohmann::json& config,
                            const std::vector<std::uint64_t>& seeds, const std::vector<std::filesystem::path>& inputs,
                            const std::vector<std::filesystem::path>& outputs) {
  auto files = [](const std::vector<std::filesystem::path>& paths) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : paths) {
      const auto f = manifest_file(p);
      arr.push_back({{"path", f.path.generic_string()}, {"git_blob_id", f.digest}});
    }
    return arr;
  };
  return {{"command", command}, {"config", config}, {"seeds", seeds}, {"inputs", files(inputs)},
          {"outputs", files(outputs)}};
}

}  // namespace mgdil::bench
