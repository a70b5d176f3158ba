#pragma once

// The two shipped case studies: the UAV delivery pickup and the drone control
// system. Sources are compiled into the library; goldens live under
// corpus/golden/ in the source tree.

#include <string>
#include <string_view>
#include <vector>

#include "tmkit/model.hpp"

namespace tmkit {

struct CorpusEntry {
  std::string name;         // "delivery", "drone"
  std::string_view source;  // .tm text
};

const std::vector<CorpusEntry>& corpus_entries();

/// Parses a shipped entry. Throws Error if the name is unknown or the source
/// does not parse cleanly.
Document load_corpus(std::string_view name);

Document delivery_model();
Document drone_model();

}  // namespace tmkit
