#include "tmkit/corpus.hpp"

#include "tmkit/dsl.hpp"

namespace tmkit {

// Defined in the generated corpus_sources.cpp.
extern const std::string_view kDeliverySource;
extern const std::string_view kDroneSource;

const std::vector<CorpusEntry>& corpus_entries() {
  static const std::vector<CorpusEntry> entries{{"delivery", kDeliverySource},
                                                {"drone", kDroneSource}};
  return entries;
}

Document load_corpus(std::string_view name) {
  for (const CorpusEntry& e : corpus_entries()) {
    if (e.name != name) continue;
    ParseResult r = parse(e.source, e.name + ".tm");
    if (!r.document) {
      const Diagnostic* d = first_error(r.diagnostics);
      throw Error(d->code, "corpus entry '" + e.name + "': " + d->message);
    }
    return std::move(*r.document);
  }
  throw Error("UNKNOWN_CORPUS", "no corpus entry named '" + std::string(name) + "'");
}

Document delivery_model() { return load_corpus("delivery"); }
Document drone_model() { return load_corpus("drone"); }

}  // namespace tmkit
