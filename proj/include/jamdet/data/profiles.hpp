#pragma once

#include "jamdet/data/dataset.hpp"

#include <vector>

namespace jamdet::data {

// The twelve femtocell datasets: observation counts and class imbalance.
const std::vector<DatasetProfile>& builtin_profiles();
// Throws DomainError for ids outside 1..12.
const DatasetProfile& profile_by_id(int id);

}  // namespace jamdet::data
