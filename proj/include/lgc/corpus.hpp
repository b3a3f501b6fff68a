#pragma once

#include <string>
#include <vector>

namespace lgc {

struct CorpusEntry {
    std::string name;  // file stem
    std::string path;
};

// The *.lisp programs of a directory, sorted by name.
std::vector<CorpusEntry> list_corpus(const std::string& dir = LGC_CORPUS_DIR);
std::string read_text_file(const std::string& path);

}  // namespace lgc
