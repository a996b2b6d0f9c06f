#pragma once

#include <string>
#include <vector>

#include "util.hpp"

namespace graminfer {

struct SnippetRecord {
  std::string id;
  std::string name;
  std::string code;
};

// Few-shot exemplar. Loading verifies the grammar compiles and parses the
// exemplar's own code: a broken exemplar would silently poison every prompt.
struct FslRecord {
  std::string id;
  std::string code;
  std::string grammar;
};

struct DatasetError {
  std::string message;
};

// Evaluation file: JSON array of {"id", "name", "code"}.
Result<std::vector<SnippetRecord>, DatasetError> load_eval(const std::string& path);

// Few-shot file: JSON array of {"id", "code", "grammar"}; fails fast on the
// first exemplar whose grammar does not compile or does not parse its code.
Result<std::vector<FslRecord>, DatasetError> load_fsl(const std::string& path);

}  // namespace graminfer
