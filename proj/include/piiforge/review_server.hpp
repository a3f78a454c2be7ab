// Copyright 2026 The pii-forge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Review service and its HTTP binding.
//
//   GET  /api/progress
//   GET  /api/next?annotator=ID
//   GET  /api/sentence/{id}
//   POST /api/decision
//   GET  /api/export?only_done=true     (CoNLL text)
//
// Errors are JSON {"error": message} with status 400 (invalid request),
// 404 (unknown sentence) or 500.

#pragma once

#include <algorithm>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "piiforge/conll.hpp"
#include "piiforge/infobox.hpp"
#include "piiforge/review.hpp"

namespace piiforge {

class NotFoundError : public ReviewError {
 public:
  using ReviewError::ReviewError;
};

/// Socket-free review service. All public methods are thread-safe; decisions
/// are validated, appended to the log and only then applied.
class ReviewService {
 public:
  ReviewService(const Corpus& machine, std::span<const PiiRecord> records,
                std::string log_path)
      : state_(machine), log_path_(std::move(log_path)) {
    for (const PiiRecord& r : records) records_.emplace(r.page_id, r);
    replay_log(log_path_, state_);
    log_ = std::make_unique<DecisionLog>(log_path_);
    order_ = review_order(machine);
  }

  /// Sentence indices in review order: pages by descending machine entity
  /// count (ties keep corpus order), sentences within a page in corpus order.
  static std::vector<std::size_t> review_order(const Corpus& machine) {
    std::vector<std::string> pages = page_order(machine);
    std::map<std::string, std::size_t> entity_count;
    for (const AnnotatedSentence& s : machine.sentences) {
      entity_count[s.page_id] += bio_to_spans(s.labels).spans.size();
    }
    std::stable_sort(pages.begin(), pages.end(), [&](const std::string& a, const std::string& b) {
      return entity_count[a] > entity_count[b];
    });
    std::map<std::string, std::size_t> rank;
    for (std::size_t i = 0; i < pages.size(); ++i) rank[pages[i]] = i;
    std::vector<std::size_t> order(machine.sentences.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return rank[machine.sentences[a].page_id] < rank[machine.sentences[b].page_id];
    });
    return order;
  }

  nlohmann::ordered_json progress() const {
    std::lock_guard lock(mu_);
    nlohmann::ordered_json j;
    j["total"] = state_.sentences().size();
    j["done"] = state_.done_count();
    j["pending"] = state_.sentences().size() - state_.done_count();
    j["decisions"] = state_.applied();
    return j;
  }

  /// The first pending sentence in review order, or null when all are done.
  nlohmann::ordered_json next(const std::string& annotator) const {
    std::lock_guard lock(mu_);
    for (std::size_t i : order_) {
      const ReviewSentence& s = state_.sentences()[i];
      if (s.status() == ReviewStatus::kPending) {
        nlohmann::ordered_json j;
        j["annotator"] = annotator;
        j["sentence"] = sentence_json(s);
        return j;
      }
    }
    nlohmann::ordered_json j;
    j["annotator"] = annotator;
    j["sentence"] = nullptr;
    return j;
  }

  nlohmann::ordered_json sentence(const std::string& sentence_id) const {
    std::lock_guard lock(mu_);
    const ReviewSentence* s = state_.find(sentence_id);
    if (s == nullptr) throw NotFoundError("unknown sentence '" + sentence_id + "'");
    return sentence_json(*s);
  }

  /// Validates, persists and applies one decision; returns the updated
  /// sentence. Missing decision ids and timestamps are filled in.
  nlohmann::ordered_json submit(const nlohmann::json& body) {
    ReviewDecision d = decision_from_json(body);
    std::lock_guard lock(mu_);
    if (state_.find(d.sentence_id) == nullptr) {
      throw NotFoundError("unknown sentence '" + d.sentence_id + "'");
    }
    if (d.decision_id.empty()) d.decision_id = "d" + std::to_string(state_.applied() + 1);
    if (d.timestamp == 0) {
      d.timestamp = std::chrono::duration_cast<std::chrono::seconds>(
                        std::chrono::system_clock::now().time_since_epoch())
                        .count();
    }
    ReviewState trial = state_;
    trial.apply(d);
    log_->append(d);
    state_ = std::move(trial);
    nlohmann::ordered_json j;
    j["decision"] = to_json(d);
    j["sentence"] = sentence_json(*state_.find(d.sentence_id));
    return j;
  }

  std::string export_conll(bool only_done) const {
    std::lock_guard lock(mu_);
    return write_conll(state_.export_gold(only_done));
  }

  ReviewState state() const {
    std::lock_guard lock(mu_);
    return state_;
  }

 private:
  nlohmann::ordered_json sentence_json(const ReviewSentence& s) const {
    auto spans_json = [](const std::vector<EntitySpan>& spans) {
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (const EntitySpan& e : spans) {
        arr.push_back(detail::span_json(e.start, e.end, tag_name(e.tag)));
      }
      return arr;
    };
    nlohmann::ordered_json j;
    j["sentence_id"] = s.sentence.sentence_id;
    j["page_id"] = s.sentence.page_id;
    nlohmann::ordered_json tokens = nlohmann::ordered_json::array();
    for (const Token& t : s.sentence.tokens) tokens.push_back(t.text);
    j["tokens"] = tokens;
    j["machine_entities"] = spans_json(s.machine_spans());
    nlohmann::ordered_json entities = nlohmann::ordered_json::array();
    for (const ReviewEntity& e : s.entities) {
      nlohmann::ordered_json ej;
      ej["original"] = detail::span_json(e.original.start, e.original.end, tag_name(e.original.tag));
      ej["current"] = e.current ? nlohmann::ordered_json(detail::span_json(
                                      e.current->start, e.current->end, tag_name(e.current->tag)))
                                : nlohmann::ordered_json(nullptr);
      ej["origin"] = e.machine ? "machine" : "added";
      ej["decided"] = e.decided;
      entities.push_back(ej);
    }
    j["entities"] = entities;
    j["gold_entities"] = spans_json(s.gold_spans());
    j["status"] = s.status() == ReviewStatus::kDone ? "done" : "pending";
    auto rec = records_.find(s.sentence.page_id);
    nlohmann::ordered_json infobox = nlohmann::ordered_json::object();
    for (TagClass t : kTagClasses) {
      infobox[std::string(tag_name(t))] =
          rec == records_.end() ? std::vector<std::string>{} : rec->second[t];
    }
    j["infobox"] = infobox;
    return j;
  }

  mutable std::mutex mu_;
  ReviewState state_;
  std::map<std::string, PiiRecord> records_;
  std::string log_path_;
  std::unique_ptr<DecisionLog> log_;
  std::vector<std::size_t> order_;
};

namespace detail {

inline void send_json(httplib::Response& res, int status, const nlohmann::ordered_json& j) {
  res.status = status;
  res.set_content(j.dump(), "application/json");
}

inline void send_error(httplib::Response& res, int status, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = message;
  send_json(res, status, j);
}

template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const NotFoundError& e) {
    send_error(res, 404, e.what());
  } catch (const ReviewError& e) {
    send_error(res, 400, e.what());
  } catch (const nlohmann::json::exception& e) {
    send_error(res, 400, std::string("invalid JSON: ") + e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

}  // namespace detail

/// Registers the API routes on `server`. The service must outlive it.
/// Also replaces httplib's SO_REUSEPORT default with SO_REUSEADDR, so binding
/// a port another server holds fails.
inline void install_routes(httplib::Server& server, ReviewService& service) {
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  server.Get("/api/progress", [&](const httplib::Request&, httplib::Response& res) {
    detail::guarded(res, [&] { detail::send_json(res, 200, service.progress()); });
  });
  server.Get("/api/next", [&](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] {
      detail::send_json(res, 200, service.next(req.get_param_value("annotator")));
    });
  });
  server.Get(R"(/api/sentence/(.+))", [&](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] {
      std::string id = httplib::detail::decode_url(req.matches[1].str(), false);
      detail::send_json(res, 200, service.sentence(id));
    });
  });
  server.Post("/api/decision", [&](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] {
      detail::send_json(res, 200, service.submit(nlohmann::json::parse(req.body)));
    });
  });
  server.Get("/api/export", [&](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] {
      std::string flag = req.get_param_value("only_done");
      bool only_done = flag.empty() || flag == "true" || flag == "1";
      res.status = 200;
      res.set_content(service.export_conll(only_done), "text/plain; charset=utf-8");
    });
  });
}

}  // namespace piiforge
