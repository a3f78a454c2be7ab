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

#include <set>
#include <sstream>

#include "piiforge/infobox.hpp"
#include "piiforge/synth.hpp"

namespace piiforge {
namespace {

std::string page_with_rows(const std::string& rows) {
  return "<html><body><table class=\"infobox vcard\"><tbody>" + rows +
         "</tbody></table><p>Body.</p></body></html>";
}

std::string row(const std::string& key, const std::string& value) {
  return "<tr><th scope=\"row\">" + key + "</th><td>" + value + "</td></tr>";
}

TEST(Html, DecodesEntities) {
  EXPECT_EQ(html::decode_entities("a&amp;b &lt;c&gt; &#233;&#x41;&nbsp;&bogus;"),
            "a&b <c> \xC3\xA9" "A &bogus;");
}

TEST(Html, ToleratesUnclosedTags) {
  html::Node doc = html::parse("<div><p>one<p>two<br>three</div><span>x");
  EXPECT_EQ(html::text_content(doc), "onetwo\nthreex");
}

TEST(Html, HiddenTextIsSkippedWhenAsked) {
  html::Node doc = html::parse(
      "<td>A<span style=\"DISPLAY: none\">B</span><span class=\"sortkey\">C</span>D</td>");
  EXPECT_EQ(html::text_content(doc, true), "AD");
  EXPECT_EQ(html::text_content(doc), "ABCD");
}

TEST(Html, ScriptContentIsNotMarkup) {
  html::Node doc = html::parse("<script>if (a<b) { x = '</p>'; }</script><p>t</p>");
  const html::Node* p = html::find_first(doc, [](const html::Node& n) { return n.name == "p"; });
  ASSERT_NE(p, nullptr);
  EXPECT_EQ(html::text_content(*p), "t");
}

TEST(ParseInfobox, ReadsRowsInOrder) {
  std::string page = page_with_rows(
      row("Born", "Jane Doe<br>12 April 1980<br>Boston") +
      row("Spouse(s)", "<div>John Smith (m. 2001)</div>") +
      "<tr><th colspan=\"2\">Section header</th></tr>" +
      row("Alma mater", "Harvard University<sup class=\"reference\">[3]</sup>"));
  RawInfobox raw = parse_infobox(page, "p");
  ASSERT_EQ(raw.entries.size(), 4u);
  EXPECT_EQ(raw.entries[0].first, "Born");
  EXPECT_EQ(raw.entries[0].second,
            (std::vector<std::string>{"Jane Doe", "12 April 1980", "Boston"}));
  EXPECT_EQ(raw.entries[1].second, (std::vector<std::string>{"John Smith (m. 2001)"}));
  EXPECT_TRUE(raw.entries[2].second.empty());
  EXPECT_EQ(raw.entries[3].second, (std::vector<std::string>{"Harvard University"}));
}

TEST(ParseInfobox, NoInfobox) {
  EXPECT_THROW(parse_infobox("<html><p>No table here.</p></html>", "p"), NoInfoboxError);
  EXPECT_THROW(parse_infobox("<table class=\"wikitable\"><tr><th>Born</th></tr></table>", "p"),
               NoInfoboxError);
}

TEST(ParseInfobox, FirstInfoboxOnlyAndNoNestedRows) {
  std::string page =
      "<table class=\"infobox\"><tr><th>Born</th><td>1950"
      "<table><tr><th>Children</th><td>Inner</td></tr></table></td></tr></table>"
      "<table class=\"infobox\"><tr><th>Children</th><td>Outer</td></tr></table>";
  RawInfobox raw = parse_infobox(page, "p");
  ASSERT_EQ(raw.entries.size(), 1u);
  EXPECT_EQ(raw.entries[0].first, "Born");
}

TEST(InfoboxKeys, RecognizedKeysMapToTags) {
  const std::vector<std::pair<std::string, TagClass>> expected = {
      {"Born", TagClass::BD},         {"Born:", TagClass::BD},
      {"Parent", TagClass::PR},       {"Parent(s)", TagClass::PR},
      {"Parents", TagClass::PR},      {"Father", TagClass::PR},
      {"Father's name", TagClass::PR}, {"Mother", TagClass::PR},
      {"Mother's name", TagClass::PR}, {"Spouse", TagClass::SP},
      {"Spouse(s)", TagClass::SP},    {"Spouses", TagClass::SP},
      {"Children", TagClass::CH},     {"Education", TagClass::ED},
      {"High school", TagClass::ED},  {"High school:", TagClass::ED},
      {"Law School", TagClass::ED},   {"School", TagClass::ED},
      {"Schools", TagClass::ED},      {"College", TagClass::ED},
      {"College(s)", TagClass::ED},   {"Colleges", TagClass::ED},
      {"Alma mater", TagClass::ED},   {"Almat mater", TagClass::ED}};
  for (const auto& [key, tag] : expected) {
    ASSERT_EQ(infobox_key_tag(key), tag) << key;
  }
  EXPECT_EQ(infobox_key_tag("Mother\xE2\x80\x99s name"), TagClass::PR);
  EXPECT_EQ(infobox_key_tag("  alma   MATER "), TagClass::ED);
  for (const char* other : {"Died", "Occupation", "Relatives", "Website", "Nationality", ""}) {
    EXPECT_FALSE(infobox_key_tag(other).has_value()) << other;
  }
}

TEST(InfoboxKeys, RandomCasingIsIgnored) {
  Rng rng(31);
  const std::vector<std::string> keys = {"Born", "Parent(s)", "Spouse(s)", "Children",
                                         "Alma mater", "Father's name", "High school:"};
  for (int round = 0; round < 1000; ++round) {
    const std::string& key = keys[rng.below(keys.size())];
    std::string cased = key;
    for (char& c : cased) {
      if (std::isalpha(static_cast<unsigned char>(c))) {
        c = rng.coin(0.5) ? static_cast<char>(std::toupper(static_cast<unsigned char>(c)))
                          : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      }
    }
    ASSERT_EQ(infobox_key_tag(cased), infobox_key_tag(key)) << cased;
  }
}

TEST(NormalizeKeys, ExampleRecord) {
  RawInfobox raw{"p",
                 {{"Born", {"Jane Doe", "(1980-04-12) 12 April 1980 (age 44)", "Boston"}},
                  {"Occupation", {"Lawyer"}},
                  {"Spouse(s)", {"John Smith (m. 2001)", "Carl Jones (m. 2010; div. 2012)"}},
                  {"Children", {"3"}},
                  {"Parent(s)", {"Ann Doe", "Bob Doe"}},
                  {"Father", {"bob doe"}},
                  {"Alma mater", {"Harvard University", "Yale Law School"}}}};
  PiiRecord r = normalize_keys(raw);
  EXPECT_EQ(r.page_id, "p");
  EXPECT_EQ(r[TagClass::BD], (std::vector<std::string>{"1980-04-12", "12 April 1980"}));
  EXPECT_EQ(r[TagClass::SP], (std::vector<std::string>{"John Smith", "Carl Jones"}));
  EXPECT_TRUE(r[TagClass::CH].empty());
  EXPECT_EQ(r[TagClass::PR], (std::vector<std::string>{"Ann Doe", "Bob Doe"}));
  EXPECT_EQ(r[TagClass::ED], (std::vector<std::string>{"Harvard University", "Yale Law School"}));
}

TEST(NormalizeKeys, Idempotent) {
  for (const SynthPage& page : synth_pages(41, 50)) {
    PiiRecord once = normalize_keys(parse_infobox(page.html, page.page_id));
    PiiRecord twice = normalize_keys(to_raw_infobox(once));
    ASSERT_EQ(twice, once) << page.page_id;
  }
}

TEST(NormalizeKeys, DeduplicatesCaseInsensitively) {
  RawInfobox raw{"p", {{"Children", {"Ann", "ANN", "ann (b. 1990)", "Bo"}}, {"Children", {"bo"}}}};
  EXPECT_EQ(normalize_keys(raw)[TagClass::CH], (std::vector<std::string>{"Ann", "Bo"}));
}

TEST(NormalizeKeys, NoRecognizedKeysGivesEmptyRecord) {
  PiiRecord r = normalize_keys(RawInfobox{"p", {{"Died", {"1 May 2001"}}}});
  EXPECT_TRUE(r.empty());
  EXPECT_EQ(r.phrase_count(), 0u);
}

// Birth-date values built from known pieces; the expected date phrases are
// the date pieces that were inserted, or the bare years if none were.
TEST(BirthDate, GeneratedValuesOracle) {
  Rng rng(32);
  const std::vector<std::string> months = {"January", "March", "may", "December", "July"};
  const std::vector<std::string> filler = {"Jane Doe", "Boston, Massachusetts", "(age 45)",
                                           "born", "U.S.", "near", "Saint Paul"};
  for (int round = 0; round < 2000; ++round) {
    std::vector<std::string> values;
    std::vector<std::string> dates;
    std::vector<std::string> years;
    auto add_unique = [](std::vector<std::string>& v, const std::string& s) {
      if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
    };
    std::size_t n_values = 1 + rng.below(3);
    for (std::size_t v = 0; v < n_values; ++v) {
      std::string value;
      std::size_t parts = 1 + rng.below(3);
      for (std::size_t p = 0; p < parts; ++p) {
        if (!value.empty()) value += rng.coin(0.5) ? " " : "; ";
        std::string year = std::to_string(1900 + rng.below(120));
        std::string day = std::to_string(1 + rng.below(28));
        std::string month = months[rng.below(months.size())];
        std::string piece;
        switch (rng.below(5)) {
          case 0: piece = day + " " + month + " " + year; add_unique(dates, piece); break;
          case 1: piece = month + " " + day + ", " + year; add_unique(dates, piece); break;
          case 2: {
            char buf[16];
            std::snprintf(buf, sizeof buf, "%s-%02d-%02d", year.c_str(),
                          static_cast<int>(1 + rng.below(12)), static_cast<int>(1 + rng.below(28)));
            piece = buf;
            add_unique(dates, piece);
            add_unique(years, year);
            break;
          }
          case 3: piece = "c. " + year; add_unique(years, year); break;
          default: piece = filler[rng.below(filler.size())]; break;
        }
        if (piece.find(", ") != std::string::npos && piece.find(year) != std::string::npos) {
          add_unique(years, year);
        } else if (piece.find(month) != std::string::npos) {
          add_unique(years, year);
        }
        value += piece;
      }
      values.push_back(value);
    }
    std::vector<std::string> got = extract_birth_date(values);
    if (!dates.empty()) {
      ASSERT_EQ(got, dates) << values[0];
    } else {
      std::set<std::string> a(got.begin(), got.end()), b(years.begin(), years.end());
      ASSERT_EQ(a, b) << values[0];
    }
  }
}

TEST(Records, JsonRoundTrip) {
  std::vector<PiiRecord> records;
  for (const SynthPage& p : synth_pages(42, 20)) records.push_back(p.record);
  std::stringstream buf;
  write_records(records, buf);
  EXPECT_EQ(read_records(buf), records);
}

TEST(Records, MalformedLineNamesLine) {
  std::stringstream buf("{\"page_id\":\"a\",\"BD\":[]}\n\n{\"page_id\":3}\n");
  try {
    read_records(buf);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Synth, InfoboxAndBodyRoundTrip) {
  for (const SynthPage& page : synth_pages(2026, 200)) {
    ASSERT_EQ(normalize_keys(parse_infobox(page.html, page.page_id)), page.record)
        << page.page_id;
    ASSERT_EQ(extract_body_text(page.html), page.body_text) << page.page_id;
  }
}

TEST(BodyText, SkipsTablesAndJoinsParagraphs) {
  std::string page =
      "<table class=\"infobox\"><tr><td><p>no</p></td></tr></table>"
      "<p>First <b>para</b>.</p><div><p>Second.<sup class=\"reference\">[1]</sup></p></div>";
  EXPECT_EQ(extract_body_text(page), "First para.\nSecond.[1]");
}

}  // namespace
}  // namespace piiforge
