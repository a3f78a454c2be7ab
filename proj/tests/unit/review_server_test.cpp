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


#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <memory>
#include <thread>

#include "piiforge/review_server.hpp"

namespace piiforge {
namespace {

using nlohmann::json;

const std::string kData = PIIFORGE_TEST_DATA;

std::vector<PiiRecord> fixture_records() {
  std::ifstream in(kData + "/fixture/records.jsonl");
  return read_records(in);
}

// A review server on an ephemeral port, torn down with the object.
class LiveServer {
 public:
  LiveServer(const Corpus& machine, const std::vector<PiiRecord>& records, const std::string& log)
      : service_(machine, records, log) {
    install_routes(server_, service_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LiveServer() {
    server_.stop();
    thread_.join();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_connection_timeout(5);
    c.set_read_timeout(5);
    return c;
  }

 private:
  ReviewService service_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

class ReviewServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    machine_ = read_conll(kData + "/fixture/gold.conll");
    records_ = fixture_records();
    log_ = (std::filesystem::temp_directory_path() /
            ("piiforge_server_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()) +
             ".jsonl"))
               .string();
    std::filesystem::remove(log_);
  }
  void TearDown() override { std::filesystem::remove(log_); }

  const AnnotatedSentence& sentence_with_entity() const {
    for (const AnnotatedSentence& s : machine_.sentences) {
      if (!bio_to_spans(s.labels).spans.empty()) return s;
    }
    throw std::logic_error("fixture has no entities");
  }

  Corpus machine_;
  std::vector<PiiRecord> records_;
  std::string log_;
};

json get_json(httplib::Client& c, const std::string& path, int expected_status = 200) {
  auto res = c.Get(path);
  EXPECT_TRUE(res) << path;
  if (!res) return json();
  EXPECT_EQ(res->status, expected_status) << path << ": " << res->body;
  return json::parse(res->body);
}

httplib::Result post(httplib::Client& c, const std::string& body) {
  return c.Post("/api/decision", body, "application/json");
}

TEST_F(ReviewServerTest, ProgressCountsSentences) {
  LiveServer srv(machine_, records_, log_);
  auto c = srv.client();
  json p = get_json(c, "/api/progress");
  EXPECT_EQ(p["total"], machine_.sentences.size());
  EXPECT_EQ(p["done"], 0);
  EXPECT_EQ(p["pending"], machine_.sentences.size());
  EXPECT_EQ(p["decisions"], 0);
}

TEST_F(ReviewServerTest, NextShowsMachineEntitiesAndInfobox) {
  LiveServer srv(machine_, records_, log_);
  auto c = srv.client();
  json n = get_json(c, "/api/next?annotator=alice");
  EXPECT_EQ(n["annotator"], "alice");
  const json& s = n["sentence"];
  ASSERT_TRUE(s.is_object());
  std::string page = s["page_id"];
  const AnnotatedSentence* src = nullptr;
  for (const AnnotatedSentence& m : machine_.sentences) {
    if (m.sentence_id == s["sentence_id"]) src = &m;
  }
  ASSERT_NE(src, nullptr);
  EXPECT_EQ(s["tokens"].size(), src->tokens.size());
  EXPECT_EQ(s["machine_entities"].size(), bio_to_spans(src->labels).spans.size());
  EXPECT_EQ(s["status"], "pending");
  // Infobox phrases of the sentence's page, per tag.
  const PiiRecord* rec = nullptr;
  for (const PiiRecord& r : records_) {
    if (r.page_id == page) rec = &r;
  }
  ASSERT_NE(rec, nullptr);
  for (TagClass t : kTagClasses) {
    EXPECT_EQ(s["infobox"][std::string(tag_name(t))].get<std::vector<std::string>>(), (*rec)[t]);
  }
  // The first page served has the most machine entities.
  std::map<std::string, std::size_t> count;
  for (const AnnotatedSentence& m : machine_.sentences) {
    count[m.page_id] += bio_to_spans(m.labels).spans.size();
  }
  for (const auto& [p, k] : count) EXPECT_LE(k, count[page]) << p;
}

TEST_F(ReviewServerTest, SentenceLookup) {
  LiveServer srv(machine_, records_, log_);
  auto c = srv.client();
  const AnnotatedSentence& s = machine_.sentences[3];
  json j = get_json(c, "/api/sentence/" + httplib::detail::encode_url(s.sentence_id));
  EXPECT_EQ(j["sentence_id"], s.sentence_id);
  json err = get_json(c, "/api/sentence/no-such-id", 404);
  EXPECT_TRUE(err.contains("error"));
}

TEST_F(ReviewServerTest, DecisionAppliesAndIsReturned) {
  LiveServer srv(machine_, records_, log_);
  auto c = srv.client();
  const AnnotatedSentence& s = sentence_with_entity();
  EntitySpan e = bio_to_spans(s.labels).spans[0];
  json body = {{"sentence_id", s.sentence_id},
               {"action", "REJECT"},
               {"target", {{"start", e.start}, {"end", e.end}, {"tag", tag_name(e.tag)}}},
               {"annotator", "alice"}};
  auto res = post(c, body.dump());
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200) << res->body;
  json r = json::parse(res->body);
  EXPECT_EQ(r["decision"]["decision_id"], "d1");
  EXPECT_GT(r["decision"]["timestamp"].get<std::int64_t>(), 0);
  EXPECT_EQ(r["sentence"]["gold_entities"].size(), bio_to_spans(s.labels).spans.size() - 1);
  EXPECT_EQ(get_json(c, "/api/progress")["decisions"], 1);
}

TEST_F(ReviewServerTest, BadRequestsAre4xx) {
  LiveServer srv(machine_, records_, log_);
  auto c = srv.client();
  const AnnotatedSentence& s = sentence_with_entity();
  std::size_t n = s.tokens.size();
  struct Case {
    std::string body;
    int status;
    std::string message;
  };
  std::vector<Case> cases = {
      {"{not json", 400, "invalid JSON"},
      {json{{"sentence_id", s.sentence_id}, {"action", "ADD"},
            {"span", {{"start", n}, {"end", n + 2}, {"tag", "PR"}}}}.dump(),
       400, "out of bounds"},
      {json{{"sentence_id", s.sentence_id}, {"action", "FLIP"}}.dump(), 400, "unknown action"},
      {json{{"sentence_id", s.sentence_id}, {"action", "REJECT"},
            {"target", {{"start", 0}, {"end", n}, {"tag", "CH"}}}}.dump(),
       400, "no entity"},
      {json{{"sentence_id", "missing"}, {"action", "CONFIRM"}}.dump(), 404, "unknown sentence"},
  };
  for (const Case& k : cases) {
    auto res = post(c, k.body);
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, k.status) << k.body;
    json err = json::parse(res->body);
    EXPECT_NE(err["error"].get<std::string>().find(k.message), std::string::npos) << err.dump();
  }
  // Nothing was logged.
  EXPECT_EQ(get_json(c, "/api/progress")["decisions"], 0);
  EXPECT_EQ(std::filesystem::file_size(log_), 0u);
}

TEST_F(ReviewServerTest, ExportHonoursOnlyDone) {
  LiveServer srv(machine_, records_, log_);
  auto c = srv.client();
  auto empty = c.Get("/api/export");
  ASSERT_TRUE(empty);
  EXPECT_EQ(empty->status, 200);
  EXPECT_EQ(empty->body, "");
  auto all = c.Get("/api/export?only_done=false");
  ASSERT_TRUE(all);
  EXPECT_EQ(parse_conll(all->body).sentences, machine_.sentences);

  const AnnotatedSentence& s = machine_.sentences[0];
  ASSERT_EQ(post(c, json{{"sentence_id", s.sentence_id}, {"action", "CONFIRM"}}.dump())->status, 200);
  auto done = c.Get("/api/export?only_done=true");
  ASSERT_TRUE(done);
  Corpus got = parse_conll(done->body);
  ASSERT_EQ(got.sentences.size(), 1u);
  EXPECT_EQ(got.sentences[0], s);
}

TEST_F(ReviewServerTest, DecisionsPersistAcrossRestart) {
  const AnnotatedSentence& s = sentence_with_entity();
  EntitySpan e = bio_to_spans(s.labels).spans[0];
  ReviewState before;
  {
    LiveServer srv(machine_, records_, log_);
    auto c = srv.client();
    json body = {{"sentence_id", s.sentence_id},
                 {"action", "CORRECT"},
                 {"target", {{"start", e.start}, {"end", e.end}, {"tag", tag_name(e.tag)}}},
                 {"span", {{"start", e.start}, {"end", e.end}, {"tag", "O"}}}};
    ASSERT_EQ(post(c, body.dump())->status, 200);
    ASSERT_EQ(post(c, json{{"sentence_id", machine_.sentences[0].sentence_id},
                           {"action", "CONFIRM"}}.dump())
                  ->status,
              200);
  }
  LiveServer srv(machine_, records_, log_);
  auto c = srv.client();
  EXPECT_EQ(get_json(c, "/api/progress")["decisions"], 2);
  json j = get_json(c, "/api/sentence/" + httplib::detail::encode_url(s.sentence_id));
  EXPECT_EQ(j["gold_entities"].size(), bio_to_spans(s.labels).spans.size() - 1);
  // The next id continues the sequence.
  auto res = post(c, json{{"sentence_id", s.sentence_id}, {"action", "CONFIRM"}}.dump());
  EXPECT_EQ(json::parse(res->body)["decision"]["decision_id"], "d3");
}

TEST_F(ReviewServerTest, CorruptLogRefusesToStart) {
  {
    std::ofstream out(log_);
    out << "{\"sentence_id\":\"x\"";
  }
  try {
    ReviewService svc(machine_, records_, log_);
    FAIL() << "expected LogCorruptionError";
  } catch (const LogCorruptionError& e) {
    EXPECT_EQ(e.last_good_offset(), 0u);
  }
}

TEST_F(ReviewServerTest, NextIsNullWhenAllDone) {
  LiveServer srv(machine_, records_, log_);
  auto c = srv.client();
  for (const AnnotatedSentence& s : machine_.sentences) {
    ASSERT_EQ(post(c, json{{"sentence_id", s.sentence_id}, {"action", "CONFIRM"}}.dump())->status,
              200);
  }
  EXPECT_TRUE(get_json(c, "/api/next")["sentence"].is_null());
  json p = get_json(c, "/api/progress");
  EXPECT_EQ(p["done"], machine_.sentences.size());
  EXPECT_EQ(p["pending"], 0);
}

TEST_F(ReviewServerTest, BusyPortFailsToBind) {
  ReviewService svc(machine_, records_, log_);
  httplib::Server a, b;
  install_routes(a, svc);
  install_routes(b, svc);
  int port = a.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  EXPECT_FALSE(b.bind_to_port("127.0.0.1", port));
}

}  // namespace
}  // namespace piiforge
