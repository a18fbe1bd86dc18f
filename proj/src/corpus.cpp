#include "giant/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace giant {
namespace {

double clamp_rating(double r, IngestStats& stats) {
  if (r < 1.0 || r > 5.0) {
    ++stats.ratings_clamped;
    return std::clamp(r, 1.0, 5.0);
  }
  return r;
}

bool parse_jsonl_line(const std::string& line, InteractionRecord& rec) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return false;
  if (!j.contains("user") || !j.contains("item") || !j.contains("rating") ||
      !j.contains("text"))
    return false;
  if (!j["user"].is_string() || !j["item"].is_string() || !j["text"].is_string())
    return false;
  if (!j["rating"].is_number()) return false;
  rec.user_id = j["user"].get<std::string>();
  rec.item_id = j["item"].get<std::string>();
  rec.rating = j["rating"].get<double>();
  rec.text = j["text"].get<std::string>();
  if (j.contains("timestamp") && j["timestamp"].is_number_integer())
    rec.timestamp = j["timestamp"].get<std::int64_t>();
  return true;
}

// RFC 4180-ish field splitting: quoted fields may contain commas and
// doubled quotes.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

bool all_whitespace(const std::string& s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::vector<InteractionRecord> ingest(const std::string& path,
                                      CorpusFormat format, IngestStats* stats) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open corpus file: " + path);

  IngestStats local;
  IngestStats& st = stats ? *stats : local;
  std::vector<InteractionRecord> records;
  std::string line;

  std::vector<int> column;  // csv column -> field id
  enum { kUser, kItem, kRating, kText, kTimestamp, kIgnore };
  bool header_seen = false;

  while (std::getline(in, line)) {
    if (line.empty() || all_whitespace(line)) continue;
    ++st.total_lines;

    InteractionRecord rec;
    bool ok = false;
    if (format == CorpusFormat::jsonl) {
      ok = parse_jsonl_line(line, rec);
    } else {
      const auto fields = split_csv_line(line);
      if (!header_seen) {
        header_seen = true;
        --st.total_lines;  // header is not a record
        for (const auto& name : fields) {
          if (name == "user") column.push_back(kUser);
          else if (name == "item") column.push_back(kItem);
          else if (name == "rating") column.push_back(kRating);
          else if (name == "text") column.push_back(kText);
          else if (name == "timestamp") column.push_back(kTimestamp);
          else column.push_back(kIgnore);
        }
        const auto has = [&](int f) {
          return std::find(column.begin(), column.end(), f) != column.end();
        };
        if (!has(kUser) || !has(kItem) || !has(kRating) || !has(kText))
          throw ConfigError("csv header must name user, item, rating, text: " + path);
        continue;
      }
      if (fields.size() == column.size()) {
        ok = true;
        for (std::size_t i = 0; i < fields.size(); ++i) {
          switch (column[i]) {
            case kUser: rec.user_id = fields[i]; break;
            case kItem: rec.item_id = fields[i]; break;
            case kText: rec.text = fields[i]; break;
            case kRating: {
              try {
                std::size_t pos = 0;
                rec.rating = std::stod(fields[i], &pos);
                if (pos != fields[i].size()) ok = false;
              } catch (...) {
                ok = false;
              }
              break;
            }
            case kTimestamp: {
              try {
                rec.timestamp = std::stoll(fields[i]);
              } catch (...) {
              }
              break;
            }
            default: break;
          }
        }
      }
    }

    if (!ok || rec.user_id.empty() || rec.item_id.empty() ||
        !std::isfinite(rec.rating) || all_whitespace(rec.text)) {
      ++st.malformed_skipped;
      continue;
    }
    rec.rating = clamp_rating(rec.rating, st);
    records.push_back(std::move(rec));
  }

  if (records.empty()) throw ConfigError("zero valid records in " + path);
  return records;
}

std::vector<InteractionRecord> k_core_filter(std::vector<InteractionRecord> records,
                                             int k, int max_reviews) {
  if (k < 1) throw std::invalid_argument("k-core requires k >= 1");

  bool changed = true;
  while (changed) {
    changed = false;
    std::map<std::string, int> user_count, item_count;
    for (const auto& r : records) {
      ++user_count[r.user_id];
      ++item_count[r.item_id];
    }
    std::vector<InteractionRecord> kept;
    kept.reserve(records.size());
    for (auto& r : records) {
      const int uc = user_count[r.user_id];
      const int ic = item_count[r.item_id];
      if (uc < k || ic < k || uc > max_reviews || ic > max_reviews) {
        changed = true;
        continue;
      }
      kept.push_back(std::move(r));
    }
    records = std::move(kept);
  }

  if (records.empty()) throw ConfigError("k-core filter removed every record");
  return records;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  const auto flush = [&] {
    // Strip leading/trailing punctuation; keep intra-word characters
    // (so "don't" survives as one token).
    std::size_t b = 0, e = cur.size();
    while (b < e && std::ispunct(static_cast<unsigned char>(cur[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(cur[e - 1]))) --e;
    if (e > b) tokens.push_back(cur.substr(b, e - b));
    cur.clear();
  };
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else {
      cur += static_cast<char>(std::tolower(c));
    }
  }
  flush();
  return tokens;
}

Vocabulary build_vocabulary(const std::vector<InteractionRecord>& records,
                            int min_count, int word_dim, Rng& rng) {
  std::map<std::string, int> counts;  // ordered for determinism
  for (const auto& r : records)
    for (const auto& t : tokenize(r.text)) ++counts[t];

  Vocabulary vocab;
  vocab.index_to_token = {"<pad>", "<unk>"};
  for (const auto& [token, count] : counts) {
    if (count >= min_count) {
      vocab.token_to_index[token] = static_cast<int>(vocab.index_to_token.size());
      vocab.index_to_token.push_back(token);
    }
  }

  vocab.embeddings = rng.uniform(vocab.size(), word_dim, -0.1, 0.1);
  vocab.embeddings.row(Vocabulary::kPad).setZero();
  return vocab;
}

std::size_t load_word_vectors(Vocabulary& vocab, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open word-vector file: " + path);
  std::size_t replaced = 0;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string token;
    if (!(ss >> token)) continue;
    const auto it = vocab.token_to_index.find(token);
    if (it == vocab.token_to_index.end()) continue;
    Vector v(vocab.word_dim());
    bool ok = true;
    for (int d = 0; d < vocab.word_dim(); ++d)
      if (!(ss >> v(d))) { ok = false; break; }
    if (!ok || !v.allFinite()) continue;
    vocab.embeddings.row(it->second) = v.transpose();
    ++replaced;
  }
  return replaced;
}

std::vector<int> tokenize_and_truncate(const std::string& text,
                                       const Vocabulary& vocab, int max_len) {
  std::vector<int> out;
  out.reserve(max_len);
  for (const auto& t : tokenize(text)) {
    if (static_cast<int>(out.size()) >= max_len) break;
    out.push_back(vocab.index_of(t));
  }
  out.resize(max_len, Vocabulary::kPad);
  return out;
}

int SplitCorpus::user_of(const std::string& id) const {
  auto it = user_index.find(id);
  return it == user_index.end() ? -1 : it->second;
}

int SplitCorpus::item_of(const std::string& id) const {
  auto it = item_index.find(id);
  return it == item_index.end() ? -1 : it->second;
}

std::vector<int> SplitCorpus::user_reviews_excluding(int user, int item) const {
  std::vector<int> out;
  for (const int idx : train_by_user[user]) {
    if (item >= 0 && item_index.at(train[idx].item_id) == item) continue;
    out.push_back(idx);
  }
  return out;
}

std::vector<int> SplitCorpus::item_reviews_excluding(int user, int item) const {
  std::vector<int> out;
  for (const int idx : train_by_item[item]) {
    if (user >= 0 && user_index.at(train[idx].user_id) == user) continue;
    out.push_back(idx);
  }
  return out;
}

SplitCorpus assemble_split(std::vector<InteractionRecord> train,
                           std::vector<InteractionRecord> validation,
                           std::vector<InteractionRecord> test) {
  SplitCorpus out;
  out.train = std::move(train);
  out.validation = std::move(validation);
  out.test = std::move(test);

  std::set<std::string> users, items;
  for (const auto* list : {&out.train, &out.validation, &out.test}) {
    for (const auto& r : *list) {
      users.insert(r.user_id);
      items.insert(r.item_id);
    }
  }
  out.user_ids.assign(users.begin(), users.end());
  out.item_ids.assign(items.begin(), items.end());
  for (std::size_t i = 0; i < out.user_ids.size(); ++i)
    out.user_index[out.user_ids[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < out.item_ids.size(); ++i)
    out.item_index[out.item_ids[i]] = static_cast<int>(i);

  out.train_by_user.resize(out.num_users());
  out.train_by_item.resize(out.num_items());
  for (int i = 0; i < static_cast<int>(out.train.size()); ++i) {
    out.train_by_user[out.user_index.at(out.train[i].user_id)].push_back(i);
    out.train_by_item[out.item_index.at(out.train[i].item_id)].push_back(i);
  }
  return out;
}

SplitCorpus split(const std::vector<InteractionRecord>& records,
                  std::uint64_t seed) {
  if (records.empty()) throw std::invalid_argument("cannot split empty corpus");

  const int n = static_cast<int>(records.size());
  Rng rng(derive_seed("corpus.split", seed));
  const std::vector<int> order = rng.permutation(n);

  const int n_train = static_cast<int>(std::llround(0.8 * n));
  const int n_val = static_cast<int>(std::llround(0.9 * n)) - n_train;
  std::vector<InteractionRecord> train, validation, test;
  for (int pos = 0; pos < n; ++pos) {
    const auto& r = records[order[pos]];
    if (pos < n_train) train.push_back(r);
    else if (pos < n_train + n_val) validation.push_back(r);
    else test.push_back(r);
  }
  return assemble_split(std::move(train), std::move(validation), std::move(test));
}

}  // namespace giant
