#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "reveval/corpus.hpp"

namespace testing_support {

std::filesystem::path fixture_dir();
std::filesystem::path data_dir();
std::filesystem::path stub_adapter();
std::filesystem::path reveval_binary();
std::filesystem::path docs_dir();

// Shell-quoted command line for the stub with extra flags.
std::string stub_command(const std::string& flags = "");

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Non-empty lines of every *.txt file under data/text, files in name order.
std::vector<std::string> text_paragraphs();

// Wraps paragraphs into edit-free documents, `per_doc` paragraphs each, as
// one abstract separated by blank lines. Ids are T0000, T0001, ...
std::vector<reveval::Document> documents_from_paragraphs(const std::vector<std::string>& paragraphs,
                                                         std::size_t per_doc);

std::string slurp(const std::filesystem::path& path);

}  // namespace testing_support
