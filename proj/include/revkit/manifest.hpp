// revkit/manifest.hpp

// Copyright 2026  RevKit Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef REVKIT_MANIFEST_HPP_
#define REVKIT_MANIFEST_HPP_

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "revkit/common.hpp"

namespace revkit {

// Phone inventory.  The silence phone is always entry 0; downstream code
// relies on that for HMM-state numbering.
class PhoneSet {
 public:
  PhoneSet() = default;

  explicit PhoneSet(std::vector<std::string> phones) {
    require(!phones.empty(), "PhoneSet: empty phone list");
    for (std::size_t i = 0; i < phones.size(); ++i) {
      require(!phones[i].empty(), "PhoneSet: empty symbol at position ", i);
      require(index_.emplace(phones[i], static_cast<int>(i)).second,
              "PhoneSet: duplicate symbol '", phones[i], "'");
    }
    phones_ = std::move(phones);
  }

  static PhoneSet load(const std::string& path) {
    std::ifstream is(path);
    require(is.good(), "PhoneSet: cannot open '", path, "'");
    std::vector<std::string> phones;
    std::string line;
    while (std::getline(is, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      phones.push_back(line);
    }
    return PhoneSet(std::move(phones));
  }

  void save(const std::string& path) const {
    std::ofstream os(path);
    require(os.good(), "PhoneSet: cannot open '", path, "' for writing");
    for (const std::string& p : phones_) os << p << "\n";
  }

  int size() const { return static_cast<int>(phones_.size()); }
  const std::string& symbol(int i) const { return phones_.at(i); }
  int silence() const { return 0; }

  bool contains(const std::string& sym) const { return index_.count(sym) > 0; }

  int id(const std::string& sym) const {
    auto it = index_.find(sym);
    require(it != index_.end(), "PhoneSet: unknown symbol '", sym, "'");
    return it->second;
  }

  const std::vector<std::string>& symbols() const { return phones_; }

 private:
  std::vector<std::string> phones_;
  std::unordered_map<std::string, int> index_;
};

enum class Condition { kClean, kRev, kRevNoise };

inline const char* condition_name(Condition c) {
  switch (c) {
    case Condition::kClean: return "clean";
    case Condition::kRev: return "rev";
    case Condition::kRevNoise: return "rev_noise";
  }
  return "?";
}

inline Condition parse_condition(const std::string& s) {
  if (s == "clean") return Condition::kClean;
  if (s == "rev") return Condition::kRev;
  if (s == "rev_noise") return Condition::kRevNoise;
  fail("unknown condition tag '", s, "' (expected clean, rev or rev_noise)");
}

struct ManifestRecord {
  std::string utterance_id;
  std::string audio_path;
  std::vector<int> transcript;  // phone ids
  Condition condition = Condition::kClean;
  std::string oracle_labels_path;  // empty if absent
};

struct Manifest {
  std::vector<ManifestRecord> records;

  std::size_t size() const { return records.size(); }
};

// One record per line: id<TAB>audio_path<TAB>phone1 phone2 ...<TAB>condition
// with an optional fifth labels_path field.
inline Manifest load_manifest(const std::string& path, const PhoneSet& phones) {
  std::ifstream is(path);
  require(is.good(), "load_manifest: cannot open '", path, "'");
  Manifest m;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      std::size_t tab = line.find('\t', start);
      if (tab == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    require(fields.size() == 4 || fields.size() == 5, "load_manifest: '", path,
            "' line ", line_no, ": expected 4 or 5 tab-separated fields, got ",
            fields.size());

    ManifestRecord rec;
    rec.utterance_id = fields[0];
    rec.audio_path = fields[1];
    require(!rec.utterance_id.empty(), "load_manifest: '", path, "' line ",
            line_no, ": empty utterance id");
    require(seen.insert(rec.utterance_id).second, "load_manifest: '", path,
            "' line ", line_no, ": duplicate utterance id '", rec.utterance_id,
            "'");

    std::istringstream ts(fields[2]);
    std::string sym;
    while (ts >> sym) {
      require(phones.contains(sym), "load_manifest: '", path, "' line ",
              line_no, ": unknown phone symbol '", sym, "'");
      rec.transcript.push_back(phones.id(sym));
    }
    require(!rec.transcript.empty(), "load_manifest: '", path, "' line ",
            line_no, ": empty transcript");

    try {
      rec.condition = parse_condition(fields[3]);
    } catch (const Error& e) {
      fail("load_manifest: '", path, "' line ", line_no, ": ", e.what());
    }
    if (fields.size() == 5) rec.oracle_labels_path = fields[4];
    m.records.push_back(std::move(rec));
  }
  return m;
}

inline void save_manifest(const Manifest& m, const PhoneSet& phones,
                          const std::string& path) {
  std::ofstream os(path);
  require(os.good(), "save_manifest: cannot open '", path, "' for writing");
  for (const ManifestRecord& rec : m.records) {
    os << rec.utterance_id << '\t' << rec.audio_path << '\t';
    for (std::size_t i = 0; i < rec.transcript.size(); ++i) {
      if (i) os << ' ';
      os << phones.symbol(rec.transcript[i]);
    }
    os << '\t' << condition_name(rec.condition);
    if (!rec.oracle_labels_path.empty()) os << '\t' << rec.oracle_labels_path;
    os << '\n';
  }
}

}  // namespace revkit

#endif  // REVKIT_MANIFEST_HPP_
