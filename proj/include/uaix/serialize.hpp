#pragma once

#include <filesystem>
#include <string>

#include "uaix/container.hpp"
#include "uaix/dataset.hpp"
#include "uaix/network.hpp"
#include "uaix/posterior.hpp"
#include "uaix/uai.hpp"

namespace uaix {

// Entry-level writers and readers. Every entry written by one call shares
// `prefix`, so several objects can live in one container.
void put_network(TensorContainer& c, const std::string& prefix, const Network& net);
Network get_network(const TensorContainer& c, const std::string& prefix);

void put_weights(TensorContainer& c, const std::string& prefix, const WeightSet& w);
WeightSet get_weights(const TensorContainer& c, const std::string& prefix);

void put_posterior(TensorContainer& c, const std::string& prefix, const WeightPosterior& posterior);
WeightPosterior get_posterior(const TensorContainer& c, const std::string& prefix);

void put_relevance_set(TensorContainer& c, const std::string& prefix, const RelevanceSet& set);
RelevanceSet get_relevance_set(const TensorContainer& c, const std::string& prefix);

void put_dataset(TensorContainer& c, const std::string& prefix, const Dataset& data);
Dataset get_dataset(const TensorContainer& c, const std::string& prefix);

void put_aggregate(TensorContainer& c, const std::string& prefix, const AggregateMap& map);
AggregateMap get_aggregate(const TensorContainer& c, const std::string& prefix);

// Whole-file helpers. Weight and posterior files carry their topology.
struct Model {
  Network net;
  WeightPosterior posterior;
};

void save_weights(const std::filesystem::path& path, const Network& net, const WeightSet& w);
std::pair<Network, WeightSet> load_weights(const std::filesystem::path& path);

void save_posterior(const std::filesystem::path& path, const Network& net, const WeightPosterior& posterior);
Model load_posterior(const std::filesystem::path& path);

void save_relevance_set(const std::filesystem::path& path, const RelevanceSet& set);
RelevanceSet load_relevance_set(const std::filesystem::path& path);

void save_dataset(const std::filesystem::path& path, const Dataset& data);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace uaix
