#include "giant/explainer.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include "json.hpp"

namespace giant {

const std::vector<std::string>& english_stopwords() {
  static const std::vector<std::string> words = {
      "a",       "about",   "above",  "after",   "again",   "all",     "also",
      "am",      "an",      "and",    "any",     "are",     "as",      "at",
      "be",      "because", "been",   "before",  "being",   "below",   "between",
      "both",    "but",     "by",     "can",     "could",   "did",     "do",
      "does",    "doing",   "down",   "during",  "each",    "few",     "for",
      "from",    "further", "had",    "has",     "have",    "having",  "he",
      "her",     "here",    "hers",   "him",     "his",     "how",     "i",
      "if",      "in",      "into",   "is",      "it",      "its",     "itself",
      "just",    "me",      "more",   "most",    "my",      "no",      "nor",
      "not",     "now",     "of",     "off",     "on",      "once",    "only",
      "or",      "other",   "our",    "ours",    "out",     "over",    "own",
      "same",    "she",     "should", "so",      "some",    "such",    "than",
      "that",    "the",     "their",  "theirs",  "them",    "then",    "there",
      "these",   "they",    "this",   "those",   "through", "to",      "too",
      "under",   "until",   "up",     "very",    "was",     "we",      "were",
      "what",    "when",    "where",  "which",   "while",   "who",     "whom",
      "why",     "will",    "with",   "would",   "you",     "your",    "yours",
      "yourself"};
  return words;
}

TopicModel build_topics(const std::vector<std::vector<std::string>>& review_tokens,
                        const std::vector<int>& review_dims, int num_dims,
                        const std::map<std::string, int>& corpus_counts,
                        const Vocabulary& vocab, int top_words) {
  if (review_tokens.size() != review_dims.size())
    throw std::invalid_argument("build_topics: review/dim count mismatch");

  const std::unordered_set<std::string> stop(english_stopwords().begin(),
                                             english_stopwords().end());

  // Corpus-wide top-1% most frequent tokens (ceil of 1% of distinct tokens).
  std::unordered_set<std::string> too_frequent;
  {
    std::vector<std::pair<std::string, int>> by_count(corpus_counts.begin(),
                                                      corpus_counts.end());
    std::sort(by_count.begin(), by_count.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    const std::size_t cut = by_count.size() / 100;  // top 1% of distinct tokens
    for (std::size_t i = 0; i < cut; ++i)
      too_frequent.insert(by_count[i].first);
  }

  const auto admissible = [&](const std::string& w) {
    return !stop.count(w) && !too_frequent.count(w);
  };

  // Term counts per dimension and document frequency across dimensions.
  std::vector<std::map<std::string, int>> tf(num_dims);
  for (std::size_t r = 0; r < review_tokens.size(); ++r) {
    const int d = review_dims[r];
    if (d < 0 || d >= num_dims) continue;
    for (const auto& w : review_tokens[r])
      if (admissible(w)) ++tf[d][w];
  }
  std::map<std::string, int> df;
  int active_dims = 0;
  for (int d = 0; d < num_dims; ++d) {
    if (tf[d].empty()) continue;
    ++active_dims;
    for (const auto& [w, c] : tf[d]) ++df[w];
  }

  TopicModel model;
  model.words.resize(num_dims);
  model.empty_flag.assign(num_dims, false);
  model.vectors = Matrix::Zero(num_dims, vocab.word_dim());

  for (int d = 0; d < num_dims; ++d) {
    if (tf[d].empty()) {
      model.empty_flag[d] = true;
      continue;
    }
    std::vector<std::pair<double, std::string>> scored;
    for (const auto& [w, c] : tf[d]) {
      const double idf = std::log(static_cast<double>(active_dims) /
                                  static_cast<double>(df.at(w)));
      const double score = static_cast<double>(c) * idf;
      if (score > 0.0) scored.emplace_back(score, w);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    // When IDF zeroes everything (single active dimension), fall back to
    // raw frequency so a degenerate corpus still yields words.
    if (scored.empty()) {
      for (const auto& [w, c] : tf[d])
        scored.emplace_back(static_cast<double>(c), w);
      std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
      });
    }
    const int take = std::min<int>(top_words, static_cast<int>(scored.size()));
    Vector sum = Vector::Zero(vocab.word_dim());
    int with_vector = 0;
    for (int i = 0; i < take; ++i) {
      model.words[d].push_back(scored[i].second);
      const int idx = vocab.index_of(scored[i].second);
      if (idx != Vocabulary::kUnk) {
        sum += vocab.embeddings.row(idx).transpose();
        ++with_vector;
      }
    }
    if (with_vector > 0) model.vectors.row(d) = (sum / with_vector).transpose();
    if (model.words[d].empty()) model.empty_flag[d] = true;
  }
  return model;
}

CandidateReviews candidate_reviews(int user, int item,
                                   const std::vector<int>& record_user,
                                   const std::vector<int>& record_item,
                                   const std::vector<int>& user_cluster,
                                   int item_topic,
                                   const std::vector<int>& review_topic) {
  CandidateReviews out;
  const int uc = user_cluster[user];
  std::vector<int> all_other;  // all reviews of the item not by this user
  for (std::size_t r = 0; r < record_item.size(); ++r) {
    if (record_item[r] != item) continue;
    if (record_user[r] == user) continue;  // never the user's own review
    all_other.push_back(static_cast<int>(r));
    if (user_cluster[record_user[r]] == uc)
      out.user_side.push_back(static_cast<int>(r));
    if (review_topic[r] == item_topic)
      out.item_side.push_back(static_cast<int>(r));
  }
  if (out.user_side.empty()) {
    out.user_side = all_other;
    out.fallback_user = true;
  }
  if (out.item_side.empty()) {
    out.item_side = all_other;
    out.fallback_item = true;
  }
  return out;
}

Vector mean_word_vector(const std::vector<std::string>& tokens,
                        const Vocabulary& vocab) {
  Vector sum = Vector::Zero(vocab.word_dim());
  int n = 0;
  for (const auto& t : tokens) {
    const int idx = vocab.index_of(t);
    if (idx == Vocabulary::kUnk || idx == Vocabulary::kPad) continue;
    sum += vocab.embeddings.row(idx).transpose();
    ++n;
  }
  return n > 0 ? Vector((sum / n)) : sum;
}

namespace {

// Sentence boundaries at runs of . ? !; each sentence is a verbatim
// substring of the review text.
std::vector<std::pair<std::string, int>> split_sentences(const std::string& text) {
  std::vector<std::pair<std::string, int>> out;
  std::size_t start = 0;
  int index = 0;
  const auto flush = [&](std::size_t end) {
    // trim whitespace
    std::size_t b = start, e = end;
    while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
    if (e > b) out.emplace_back(text.substr(b, e - b), index++);
    start = end;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '.' || c == '?' || c == '!') {
      std::size_t j = i;
      while (j + 1 < text.size() &&
             (text[j + 1] == '.' || text[j + 1] == '?' || text[j + 1] == '!'))
        ++j;
      flush(j + 1);
      i = j;
    }
  }
  flush(text.size());
  return out;
}

}  // namespace

std::vector<ScoredSentence> extract_sentences(
    const std::vector<int>& candidate_records,
    const std::vector<InteractionRecord>& records, const Vector& topic_vector,
    const Vocabulary& vocab, int top_n) {
  const double topic_norm = topic_vector.norm();
  std::vector<ScoredSentence> scored;
  for (const int r : candidate_records) {
    for (const auto& [sentence, sidx] : split_sentences(records[r].text)) {
      const Vector v = mean_word_vector(tokenize(sentence), vocab);
      const double vn = v.norm();
      ScoredSentence s;
      s.text = sentence;
      s.review_id = r;
      s.sentence_index = sidx;
      s.score = (vn > 0.0 && topic_norm > 0.0)
                    ? topic_vector.dot(v) / (topic_norm * vn)
                    : 0.0;
      scored.push_back(std::move(s));
    }
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.review_id != b.review_id) return a.review_id < b.review_id;
    return a.sentence_index < b.sentence_index;
  });
  if (static_cast<int>(scored.size()) > top_n) scored.resize(top_n);
  return scored;
}

std::string explanation_to_json(const Explanation& e) {
  nlohmann::json j;
  j["user_id"] = e.user_id;
  j["item_id"] = e.item_id;
  j["predicted_rating"] = e.predicted_rating;
  j["suggestion"] = e.suggestion;
  j["user_topic"] = e.user_topic;
  j["item_topic"] = e.item_topic;
  j["user_topic_words"] = e.user_topic_words;
  j["item_topic_words"] = e.item_topic_words;
  j["fallback_user"] = e.fallback_user;
  j["fallback_item"] = e.fallback_item;
  const auto sentences_json = [](const std::vector<ScoredSentence>& list) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : list)
      arr.push_back({{"text", s.text},
                     {"review_id", s.review_id},
                     {"score", s.score}});
    return arr;
  };
  j["user_sentences"] = sentences_json(e.user_sentences);
  j["item_sentences"] = sentences_json(e.item_sentences);
  return j.dump(2);
}

}  // namespace giant
