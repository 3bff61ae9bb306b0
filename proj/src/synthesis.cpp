#include "crowdsoft/synthesis.hpp"

#include <cmath>

#include "crowdsoft/detail/random.hpp"

namespace crowdsoft {
namespace {

std::string padded(const char* prefix, std::size_t value, std::size_t count) {
  std::size_t width = 2;
  for (std::size_t c = count > 0 ? count - 1 : 0; c >= 100; c /= 10) ++width;
  std::string digits = std::to_string(value);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

void check_distribution(const std::vector<double>& p, std::size_t k, const std::string& field) {
  if (p.size() != k) {
    throw Error(ErrorCode::InvalidConfig, field + ": expected " + std::to_string(k) + " entries, got " +
                                              std::to_string(p.size()));
  }
  if (!Distribution::is_valid(p)) throw Error(ErrorCode::InvalidConfig, field + ": not a probability distribution");
}

}  // namespace

void CrowdSpec::validate() const {
  if (n_items < 1) throw Error(ErrorCode::InvalidConfig, "n_items: must be at least 1");
  if (num_labels < 2) throw Error(ErrorCode::InvalidConfig, "K: must be at least 2");
  if (annotators.empty()) throw Error(ErrorCode::InvalidConfig, "annotators: need at least 1");
  if (!(coverage > 0.0 && coverage <= 1.0)) throw Error(ErrorCode::InvalidConfig, "coverage: must be in (0, 1]");
  if (!class_prior.empty()) check_distribution(class_prior, num_labels, "class_prior");
  if (!labels.empty() && labels.size() != num_labels) {
    throw Error(ErrorCode::InvalidConfig, "labels: expected " + std::to_string(num_labels) + " names");
  }
  const double chance = 1.0 / static_cast<double>(num_labels);
  for (std::size_t j = 0; j < annotators.size(); ++j) {
    const std::string field = "annotators[" + std::to_string(j) + "]";
    if (const auto* f = std::get_if<FaithfulRole>(&annotators[j])) {
      if (!(f->accuracy > chance && f->accuracy <= 1.0)) {
        throw Error(ErrorCode::InvalidConfig, field + ".faithful: must be in (1/K, 1]");
      }
    } else {
      check_distribution(std::get<SpammerRole>(annotators[j]).strategy, num_labels, field + ".strategy");
    }
  }
}

LabelVocabulary CrowdSpec::vocabulary() const {
  if (!labels.empty()) return LabelVocabulary(labels);
  std::vector<std::string> names;
  for (std::size_t y = 0; y < num_labels; ++y) {
    names.push_back(num_labels <= 26 ? std::string(1, static_cast<char>('A' + y)) : padded("L", y, num_labels));
  }
  return LabelVocabulary(std::move(names));
}

SyntheticCrowd generate_crowd(const CrowdSpec& spec) {
  spec.validate();
  const auto vocab = spec.vocabulary();
  const std::size_t k = spec.num_labels;
  const std::vector<double> prior =
      spec.class_prior.empty() ? std::vector<double>(k, 1.0 / static_cast<double>(k)) : spec.class_prior;

  detail::Rng rng(spec.seed);
  AnnotationSetBuilder builder(vocab);
  SyntheticCrowd out;
  std::vector<bool> covers(spec.annotators.size());
  for (std::size_t i = 0; i < spec.n_items; ++i) {
    const std::string item = padded("item", i, spec.n_items);
    const std::size_t truth = rng.categorical(prior);
    out.truth.by_item.emplace(item, truth);

    bool any = false;
    while (!any) {
      for (std::size_t j = 0; j < covers.size(); ++j) {
        covers[j] = rng.uniform() < spec.coverage;
        any = any || covers[j];
      }
    }
    for (std::size_t j = 0; j < covers.size(); ++j) {
      if (!covers[j]) continue;
      std::size_t label = 0;
      if (const auto* f = std::get_if<FaithfulRole>(&spec.annotators[j])) {
        if (rng.uniform() < f->accuracy) {
          label = truth;
        } else {
          label = rng.index(k - 1);
          if (label >= truth) ++label;
        }
      } else {
        label = rng.categorical(std::get<SpammerRole>(spec.annotators[j]).strategy);
      }
      builder.add(item, padded("ann", j, spec.annotators.size()), vocab[label]);
    }
  }
  out.annotations = builder.build();
  return out;
}

}  // namespace crowdsoft
