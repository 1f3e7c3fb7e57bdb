#pragma once

#include <string>
#include <utility>
#include <vector>

namespace orderthresh::detail {

struct PublishedTable {
  std::vector<std::pair<std::string, std::vector<double>>> rows;
};

const PublishedTable* find_published(const std::string& name);

}  // namespace orderthresh::detail
