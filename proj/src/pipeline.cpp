#include "ccf/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include <json.hpp>

#include "ccf/errors.hpp"
#include "ccf/random.hpp"

namespace ccf {
namespace {

std::string normalize_answer(std::string_view answer) {
  const auto first = answer.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = answer.find_last_not_of(" \t\r\n");
  std::string out(answer.substr(first, last - first + 1));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

const std::map<std::string, MaterialClass>& accepted_answers() {
  static const std::map<std::string, MaterialClass> table = {
      {"metal, tin or zinc", MaterialClass::kMetal},
      {"shingles", MaterialClass::kShingles},
      {"asbestos", MaterialClass::kShingles},
      {"thatch or grass", MaterialClass::kThatch},
      {"environment", MaterialClass::kEnvironment},
      {"metal", MaterialClass::kMetal},
      {"thatch", MaterialClass::kThatch},
  };
  return table;
}

bool is_excluded_option(const std::string& answer) {
  static const char* const kExcluded[] = {"tiles", "plastic sheets", "multiple materials", "some other material",
                                          "could not tell/could not see"};
  return std::any_of(std::begin(kExcluded), std::end(kExcluded), [&](const char* s) { return answer == s; });
}

bool sample_less(const SpectralSample& a, const SpectralSample& b) {
  if (a.provenance != b.provenance) return a.provenance < b.provenance;
  return a.features < b.features;
}

}  // namespace

std::string_view material_name(MaterialClass c) {
  switch (c) {
    case MaterialClass::kEnvironment:
      return "environment";
    case MaterialClass::kMetal:
      return "metal";
    case MaterialClass::kShingles:
      return "shingles";
    case MaterialClass::kThatch:
      return "thatch";
  }
  return "unknown";
}

std::vector<std::string> material_names() {
  std::vector<std::string> names;
  for (MaterialClass c : kAllMaterials) names.emplace_back(material_name(c));
  return names;
}

SurveyMapping map_survey_class(std::string_view answer) {
  const std::string key = normalize_answer(answer);
  const auto& table = accepted_answers();
  if (auto it = table.find(key); it != table.end()) return {it->second, {}};
  if (is_excluded_option(key)) return {std::nullopt, "survey option outside the four material classes"};
  return {std::nullopt, "unrecognized survey answer '" + std::string(answer) + "'"};
}

std::string_view reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::kRejectedClass:
      return "rejected_class";
    case RejectReason::kOutOfBounds:
      return "out_of_bounds";
    case RejectReason::kNodata:
      return "nodata";
    case RejectReason::kEmpty:
      return "empty";
  }
  return "unknown";
}

std::size_t RejectionReport::rejected() const {
  std::size_t total = 0;
  for (std::size_t c : counts) total += c;
  return total;
}

void RejectionReport::merge(const RejectionReport& other) {
  n_points += other.n_points;
  n_accepted += other.n_accepted;
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  std::map<std::string, std::size_t> answers(rejected_answers.begin(), rejected_answers.end());
  for (const auto& [answer, n] : other.rejected_answers) answers[answer] += n;
  rejected_answers.assign(answers.begin(), answers.end());
}

std::string RejectionReport::to_text() const {
  std::ostringstream out;
  out << "reason            count\n";
  out << "----------------  -----\n";
  auto line = [&](std::string_view name, std::size_t n) {
    out << name << std::string(18 - std::min<std::size_t>(name.size(), 17), ' ') << n << "\n";
  };
  line("points", n_points);
  line("accepted", n_accepted);
  for (std::size_t i = 0; i < kRejectReasonCount; ++i) line(reason_name(static_cast<RejectReason>(i)), counts[i]);
  if (!rejected_answers.empty()) {
    out << "\nrejected survey answers:\n";
    for (const auto& [answer, n] : rejected_answers) out << "  " << answer << ": " << n << "\n";
  }
  return out.str();
}

std::string RejectionReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["points"] = n_points;
  doc["accepted"] = n_accepted;
  nlohmann::ordered_json rejected = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < kRejectReasonCount; ++i) {
    rejected[std::string(reason_name(static_cast<RejectReason>(i)))] = counts[i];
  }
  doc["rejected"] = std::move(rejected);
  nlohmann::ordered_json answers = nlohmann::ordered_json::object();
  for (const auto& [answer, n] : rejected_answers) answers[answer] = n;
  doc["rejected_answers"] = std::move(answers);
  return doc.dump(2) + "\n";
}

ExtractionResult extract_samples(const Scene& scene, const std::vector<LabeledPoint>& points) {
  validate_scene(scene);
  ExtractionResult result;
  RejectionReport& report = result.report;
  std::map<std::string, std::size_t> answers;
  auto reject = [&](RejectReason reason) { ++report.counts[static_cast<std::size_t>(reason)]; };

  for (const LabeledPoint& point : points) {
    ++report.n_points;
    const SurveyMapping mapping = map_survey_class(point.survey_class);
    if (!mapping.material) {
      reject(RejectReason::kRejectedClass);
      ++answers[point.survey_class];
      continue;
    }
    const auto pixel = geo_to_pixel(scene, point.lon, point.lat);
    if (!pixel) {
      reject(RejectReason::kOutOfBounds);
      continue;
    }
    const PixelSpectrum spectrum = pixel_spectrum(scene, pixel->col, pixel->row);
    if (spectrum.has_nodata) {
      reject(RejectReason::kNodata);
      continue;
    }
    if (std::all_of(spectrum.values.begin(), spectrum.values.end(), [](std::uint16_t v) { return v == 0; })) {
      reject(RejectReason::kEmpty);
      continue;
    }

    SpectralSample sample;
    sample.features.reserve(spectrum.values.size());
    for (std::uint16_t v : spectrum.values) sample.features.push_back(normalize_reflectance(v));
    sample.label = mapping.material;
    sample.provenance = point.source_id;
    result.samples.push_back(std::move(sample));
    ++report.n_accepted;
  }
  report.rejected_answers.assign(answers.begin(), answers.end());
  return result;
}

std::vector<SpectralSample> balance(const std::vector<SpectralSample>& samples, std::size_t n_per_class,
                                    std::uint64_t seed) {
  std::array<std::vector<const SpectralSample*>, kMaterialCount> by_class;
  for (const SpectralSample& s : samples) {
    if (s.label) by_class[static_cast<std::size_t>(*s.label)].push_back(&s);
  }
  for (std::size_t c = 0; c < kMaterialCount; ++c) {
    if (by_class[c].size() < n_per_class) {
      std::ostringstream msg;
      msg << "class '" << material_name(static_cast<MaterialClass>(c)) << "' has " << by_class[c].size()
          << " samples but " << n_per_class << " per class were requested (counts:";
      for (std::size_t k = 0; k < kMaterialCount; ++k) {
        msg << " " << material_name(static_cast<MaterialClass>(k)) << "=" << by_class[k].size();
      }
      msg << ")";
      throw ImbalanceError(msg.str());
    }
  }

  std::vector<SpectralSample> out;
  out.reserve(n_per_class * kMaterialCount);
  for (std::size_t c = 0; c < kMaterialCount; ++c) {
    auto& pool = by_class[c];
    std::sort(pool.begin(), pool.end(), [](const auto* a, const auto* b) { return sample_less(*a, *b); });
    Rng rng = make_rng(seed, c);
    for (std::size_t i = 0; i < n_per_class; ++i) {
      std::swap(pool[i], pool[i + uniform_index(rng, pool.size() - i)]);
    }
    std::vector<const SpectralSample*> chosen(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_per_class));
    std::sort(chosen.begin(), chosen.end(), [](const auto* a, const auto* b) { return sample_less(*a, *b); });
    for (const auto* s : chosen) out.push_back(*s);
  }
  return out;
}

TrainingSet to_training_set(const std::vector<SpectralSample>& samples) {
  TrainingSet set;
  set.class_names = material_names();
  if (samples.empty()) return set;
  const std::size_t d = samples.front().features.size();
  set.features.resize(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(d));
  set.labels.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const SpectralSample& s = samples[i];
    if (!s.label) throw InputError("to_training_set: sample '" + s.provenance + "' has no label");
    if (s.features.size() != d) {
      throw InputError("to_training_set: sample '" + s.provenance + "' has " + std::to_string(s.features.size()) +
                       " features, expected " + std::to_string(d));
    }
    for (std::size_t j = 0; j < d; ++j) {
      set.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s.features[j];
    }
    set.labels.push_back(static_cast<int>(*s.label));
  }
  return set;
}

}  // namespace ccf
