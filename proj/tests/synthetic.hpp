// Planted-structure synthetic corpus shared by the unit tests and the
// acceptance suite: K user clusters x K item clusters, block-structured
// ratings and a disjoint vocabulary per item cluster.
#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "giant/corpus.hpp"
#include "giant/rng.hpp"
#include "json.hpp"

namespace synth {

inline const std::array<std::vector<std::string>, 4>& cluster_vocab() {
  static const std::array<std::vector<std::string>, 4> vocab = {{
      {"tape", "adhesive", "sticky", "sturdy", "roll", "dispenser",
       "binder", "staple", "glue", "desk", "shelf", "stationery"},
      {"malt", "hops", "lager", "brew", "foam", "bitter", "ale", "pint",
       "barley", "yeast", "stout", "amber"},
      {"melody", "guitar", "vocals", "rhythm", "album", "chorus", "drums",
       "bass", "tempo", "lyric", "tune", "concert"},
      {"lens", "shutter", "aperture", "focus", "tripod", "zoom", "sensor",
       "flash", "exposure", "pixel", "viewfinder", "battery"},
  }};
  return vocab;
}

// Appear in every review stream so IDF sends them to zero.
inline const std::vector<std::string>& common_words() {
  static const std::vector<std::string> words = {"good", "really", "nice",
                                                 "item", "quality"};
  return words;
}

struct SyntheticCorpus {
  std::vector<giant::InteractionRecord> records;
  int users = 0;
  int items = 0;
  int clusters = 4;
  int users_per_cluster = 0;
  int items_per_cluster = 0;

  std::string user_id(int u) const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "u%03d", u);
    return buf;
  }
  std::string item_id(int i) const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "i%03d", i);
    return buf;
  }
  int user_cluster(int u) const { return u / users_per_cluster; }
  int item_cluster(int i) const { return i / items_per_cluster; }
  int user_cluster_of_id(const std::string& id) const {
    return user_cluster(std::stoi(id.substr(1)));
  }
};

inline std::string make_review_text(int item_cluster, giant::Rng& rng) {
  const auto& vocab = cluster_vocab()[item_cluster];
  const auto& common = common_words();
  std::string text;
  const int sentences = 2 + static_cast<int>(rng.next_below(2));
  for (int s = 0; s < sentences; ++s) {
    const int words = 4 + static_cast<int>(rng.next_below(3));
    for (int w = 0; w < words; ++w) {
      if (!text.empty() && text.back() != ' ' && text.back() != '.') text += ' ';
      if (rng.next_double() < 0.2) {
        text += "the ";
        text += common[rng.next_below(common.size())];
      } else {
        text += vocab[rng.next_below(vocab.size())];
      }
    }
    text += s % 3 == 2 ? "!" : ".";
    if (s + 1 < sentences) text += ' ';
  }
  return text;
}

inline SyntheticCorpus make_synthetic_corpus(std::uint64_t seed,
                                             int users_per_cluster = 50,
                                             int items_per_cluster = 50,
                                             int reviews_per_user = 10) {
  SyntheticCorpus out;
  out.users_per_cluster = users_per_cluster;
  out.items_per_cluster = items_per_cluster;
  out.users = 4 * users_per_cluster;
  out.items = 4 * items_per_cluster;

  giant::Rng rng(seed);
  for (int u = 0; u < out.users; ++u) {
    const int cu = out.user_cluster(u);
    const int j = u % users_per_cluster;
    std::vector<bool> taken(out.items, false);
    const int preferred = (reviews_per_user * 2 + 2) / 3;  // ~2/3 own block
    for (int r = 0; r < reviews_per_user; ++r) {
      int item = -1;
      for (int attempt = 0; attempt < 64 && item < 0; ++attempt) {
        int candidate;
        if (r < 2) {
          // Deterministic picks so every item collects at least two
          // own-block reviews and survives a 2-core filter.
          const int offset = r == 0 ? j : (j + 13) % items_per_cluster;
          candidate = cu * items_per_cluster + offset;
        } else if (r < preferred) {
          candidate = cu * items_per_cluster +
                      static_cast<int>(rng.next_below(items_per_cluster));
        } else {
          candidate = static_cast<int>(rng.next_below(out.items));
        }
        if (!taken[candidate]) item = candidate;
      }
      if (item < 0) continue;
      taken[item] = true;

      const int ci = out.item_cluster(item);
      giant::InteractionRecord rec;
      rec.user_id = out.user_id(u);
      rec.item_id = out.item_id(item);
      rec.rating = ci == cu ? 4.0 + static_cast<double>(rng.next_below(2))
                            : 1.0 + static_cast<double>(rng.next_below(3));
      rec.text = make_review_text(ci, rng);
      out.records.push_back(std::move(rec));
    }
  }
  return out;
}

inline void write_jsonl(const SyntheticCorpus& corpus, const std::string& path) {
  std::ofstream out(path);
  for (const auto& r : corpus.records) {
    nlohmann::json j;
    j["user"] = r.user_id;
    j["item"] = r.item_id;
    j["rating"] = r.rating;
    j["text"] = r.text;
    out << j.dump() << '\n';
  }
}

}  // namespace synth
