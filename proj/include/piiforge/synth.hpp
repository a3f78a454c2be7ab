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

// Deterministic synthetic biography pages.
//
// Each page is an HTML document with an infobox and a few body paragraphs,
// together with the record the infobox should normalize to and a gold
// annotation of the body text. The text deliberately contains the kinds of
// mentions automatic annotation gets wrong: shortened names and institution
// names, dates written in another format than the infobox, titles in front
// of names, a city that shares a child's name, and people and schools that
// are not the subject's.

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "piiforge/corpus.hpp"
#include "piiforge/infobox.hpp"
#include "piiforge/random.hpp"

namespace piiforge {

struct SynthPage {
  std::string page_id;
  std::string html;
  std::string body_text;  // what extract_body_text returns for html
  PiiRecord record;       // what the infobox normalizes to
  std::vector<AnnotatedSentence> gold;  // every sentence of body_text
};

namespace detail {

inline constexpr std::string_view kMaleFirst[] = {
    "James", "Robert", "Michael", "William", "David", "Richard", "Thomas", "Charles",
    "Daniel", "Matthew", "Anthony", "Mark", "Steven", "Andrew", "Joshua", "Kenneth",
    "Kevin", "Brian", "George", "Edward", "Ronald", "Timothy", "Jason", "Jeffrey",
    "Ryan", "Jacob", "Gary", "Nicholas", "Eric", "Jonathan", "Stephen", "Larry",
    "Justin", "Scott", "Brandon", "Benjamin", "Samuel", "Gregory", "Alexander", "Patrick",
    "Frank", "Raymond", "Jack", "Dennis", "Jerry", "Tyler", "Aaron", "Henry", "Walter",
    "Peter", "Harold", "Douglas", "Nathan", "Zachary", "Kyle", "Noah", "Ethan", "Jeremy",
    "Christian", "Keith", "Roger", "Terry", "Sean", "Gerald", "Carl", "Arthur", "Lawrence",
    "Dylan", "Jesse", "Bryan", "Joe", "Jordan", "Billy", "Bruce", "Albert", "Willie",
    "Gabriel", "Logan", "Alan", "Juan", "Wayne", "Roy", "Ralph", "Randy", "Eugene",
    "Vincent", "Russell", "Elijah", "Louis", "Bobby", "Philip", "Johnny", "Troy"};

inline constexpr std::string_view kFemaleFirst[] = {
    "Mary", "Patricia", "Jennifer", "Linda", "Elizabeth", "Barbara", "Susan", "Jessica",
    "Sarah", "Karen", "Lisa", "Nancy", "Betty", "Margaret", "Sandra", "Ashley", "Kimberly",
    "Emily", "Donna", "Michelle", "Carol", "Amanda", "Dorothy", "Melissa", "Deborah",
    "Stephanie", "Rebecca", "Sharon", "Laura", "Cynthia", "Kathleen", "Amy", "Angela",
    "Shirley", "Anna", "Brenda", "Pamela", "Emma", "Nicole", "Helen", "Samantha",
    "Katherine", "Christine", "Debra", "Rachel", "Carolyn", "Janet", "Catherine", "Maria",
    "Heather", "Diane", "Ruth", "Julie", "Olivia", "Joyce", "Virginia", "Victoria", "Kelly",
    "Lauren", "Christina", "Joan", "Evelyn", "Judith", "Megan", "Andrea", "Cheryl",
    "Hannah", "Jacqueline", "Martha", "Gloria", "Teresa", "Ann", "Sara", "Madison",
    "Frances", "Kathryn", "Janice", "Jean", "Abigail", "Alice", "Judy", "Sophia", "Grace",
    "Denise", "Amber", "Doris", "Marilyn", "Danielle", "Beverly", "Isabella", "Theresa"};

inline constexpr std::string_view kSurnames[] = {
    "Smith", "Johnson", "Williams", "Brown", "Jones", "Garcia", "Miller", "Davis",
    "Rodriguez", "Martinez", "Hernandez", "Lopez", "Gonzalez", "Wilson", "Anderson",
    "Thomas", "Taylor", "Moore", "Jackson", "Martin", "Lee", "Perez", "Thompson", "White",
    "Harris", "Sanchez", "Clark", "Ramirez", "Lewis", "Robinson", "Walker", "Young",
    "Allen", "King", "Wright", "Scott", "Torres", "Nguyen", "Hill", "Flores", "Green",
    "Adams", "Nelson", "Baker", "Hall", "Rivera", "Campbell", "Mitchell", "Carter",
    "Roberts", "Gomez", "Phillips", "Evans", "Turner", "Diaz", "Parker", "Cruz", "Edwards",
    "Collins", "Reyes", "Stewart", "Morris", "Morales", "Murphy", "Cook", "Rogers",
    "Gutierrez", "Ortiz", "Morgan", "Cooper", "Peterson", "Bailey", "Reed", "Kelly",
    "Howard", "Ramos", "Kim", "Cox", "Ward", "Richardson", "Watson", "Brooks", "Chavez",
    "Wood", "James", "Bennett", "Gray", "Mendoza", "Ruiz", "Hughes", "Price", "Alvarez",
    "Castillo", "Sanders", "Patel", "Myers", "Long", "Ross", "Foster", "Jimenez", "Harper",
    "Whitfield", "Okafor", "Lindqvist", "Moreau", "Kowalski", "Brennan", "Delgado"};

// Institution name and the short form used in running text.
inline constexpr std::pair<std::string_view, std::string_view> kInstitutions[] = {
    {"Harvard University", "Harvard"},
    {"Yale University", "Yale"},
    {"Princeton University", "Princeton"},
    {"Stanford University", "Stanford"},
    {"Columbia University", "Columbia"},
    {"Cornell University", "Cornell"},
    {"Duke University", "Duke"},
    {"Brown University", "Brown"},
    {"Georgetown University", "Georgetown"},
    {"Vanderbilt University", "Vanderbilt"},
    {"Northwestern University", "Northwestern"},
    {"University of Michigan", "Michigan"},
    {"University of Chicago", "Chicago"},
    {"University of Texas at Austin", "Texas"},
    {"University of Oxford", "Oxford"},
    {"University of Cambridge", "Cambridge"},
    {"University of Toronto", "Toronto"},
    {"University of Virginia", "Virginia"},
    {"University of Washington", "Washington"},
    {"Boston College", "Boston College"},
    {"Dartmouth College", "Dartmouth"},
    {"Amherst College", "Amherst"},
    {"Williams College", "Williams"},
    {"Oberlin College", "Oberlin"},
    {"Juilliard School", "Juilliard"},
    {"Yale Law School", "Yale Law"},
    {"Harvard Law School", "Harvard Law"},
    {"Lincoln High School", "Lincoln High"},
    {"Central High School", "Central High"},
    {"Massachusetts Institute of Technology", "MIT"},
    {"California Institute of Technology", "Caltech"},
    {"Royal Academy of Music", "the Royal Academy"},
    {"United States Naval Academy", "the Naval Academy"},
};

inline constexpr std::pair<std::string_view, std::string_view> kPlaces[] = {
    {"Boston", "Massachusetts"},   {"Chicago", "Illinois"},     {"Denver", "Colorado"},
    {"Portland", "Oregon"},        {"Austin", "Texas"},         {"Columbus", "Ohio"},
    {"Savannah", "Georgia"},       {"Madison", "Wisconsin"},    {"Albany", "New York"},
    {"Tucson", "Arizona"},         {"Raleigh", "North Carolina"}, {"Omaha", "Nebraska"},
    {"Spokane", "Washington"},     {"Dayton", "Ohio"},          {"Trenton", "New Jersey"},
};

inline constexpr std::string_view kOccupations[] = {
    "lawyer", "politician", "physician", "novelist", "journalist", "architect",
    "economist", "businessman", "diplomat", "historian", "engineer", "composer",
    "film director", "educator", "judge", "philanthropist", "actor", "singer"};

inline constexpr std::string_view kFields[] = {
    "law", "history", "economics", "medicine", "political science", "music",
    "engineering", "literature", "philosophy", "chemistry", "architecture"};

inline constexpr std::string_view kMonthNames[] = {
    "January", "February", "March", "April", "May", "June", "July",
    "August", "September", "October", "November", "December"};

inline constexpr std::string_view kTitles[] = {"Senator", "Judge", "Professor", "Governor",
                                               "Ambassador"};

struct Date {
  int day = 1;
  int month = 1;
  int year = 1950;

  std::string dmy() const {
    return std::to_string(day) + " " + std::string(kMonthNames[month - 1]) + " " +
           std::to_string(year);
  }
  std::string mdy() const {
    return std::string(kMonthNames[month - 1]) + " " + std::to_string(day) + ", " +
           std::to_string(year);
  }
  std::string iso() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
  }
};

struct Person {
  std::string first;
  std::string last;
  bool female = false;

  std::string full() const { return first + " " + last; }
};

// Text under construction with marked entity mentions (byte ranges of the
// body text).
class BodyBuilder {
 public:
  struct Mention {
    std::size_t begin;
    std::size_t end;
    TagClass tag;
  };

  void text(std::string_view s) {
    body_ += s;
    html_ += s;
  }
  void entity(std::string_view s, TagClass tag) {
    mentions_.push_back(Mention{body_.size(), body_.size() + s.size(), tag});
    text(s);
  }
  void citation(int n) {
    std::string marker = "[" + std::to_string(n) + "]";
    body_ += marker;
    html_ += "<sup class=\"reference\"><a href=\"#cite_note-" + std::to_string(n) + "\">" +
             marker + "</a></sup>";
  }
  void start_paragraph() {
    if (!body_.empty()) body_ += '\n';
    html_ += "<p>";
  }
  void end_paragraph() { html_ += "</p>\n"; }

  const std::string& body() const { return body_; }
  const std::string& html() const { return html_; }
  const std::vector<Mention>& mentions() const { return mentions_; }

 private:
  std::string body_;
  std::string html_;
  std::vector<Mention> mentions_;
};

// Gold sentences of `text`, indexed exactly as annotate_page indexes them.
inline std::vector<AnnotatedSentence> project_mentions(
    const std::string& page_id, std::string_view text,
    const std::vector<BodyBuilder::Mention>& mentions) {
  std::vector<AnnotatedSentence> out;
  std::vector<CleanSentence> sentences = clean_and_split(text);
  for (std::size_t index = 0; index < sentences.size(); ++index) {
    const CleanSentence& cs = sentences[index];
    std::vector<Token> tokens = tokenize(cs.text);
    if (tokens.empty()) continue;
    std::vector<EntitySpan> spans;
    std::ptrdiff_t open = -1;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      std::size_t src = cs.source[tokens[t].start];
      std::ptrdiff_t hit = -1;
      for (std::size_t m = 0; m < mentions.size(); ++m) {
        if (src >= mentions[m].begin && src < mentions[m].end) hit = static_cast<std::ptrdiff_t>(m);
      }
      if (hit >= 0 && hit == open) {
        spans.back().end = t + 1;
      } else if (hit >= 0) {
        spans.push_back(EntitySpan{t, t + 1, mentions[static_cast<std::size_t>(hit)].tag});
      }
      open = hit;
    }
    AnnotatedSentence s;
    s.sentence_id = page_id + ":" + std::to_string(index);
    s.page_id = page_id;
    s.labels = spans_to_bio(tokens, spans);
    s.tokens = std::move(tokens);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace detail

/// Generates page number `index` of the synthetic corpus for `seed`. Pages
/// are independent: page i is the same whatever the corpus size.
inline SynthPage synth_page(std::uint64_t seed, std::size_t index) {
  using detail::Person;
  Rng rng(seed * 1000003ull + index);
  auto pick = [&](const auto& list) -> std::string {
    return std::string(list[rng.below(std::size(list))]);
  };
  auto person = [&](bool female, std::string_view last) {
    Person p;
    p.female = female;
    p.first = female ? pick(detail::kFemaleFirst) : pick(detail::kMaleFirst);
    p.last = last.empty() ? pick(detail::kSurnames) : std::string(last);
    return p;
  };

  SynthPage page;
  char id[32];
  std::snprintf(id, sizeof id, "bio%04zu", index);
  page.page_id = id;
  page.record.page_id = page.page_id;

  const bool female = rng.coin(0.5);
  const Person subject = person(female, "");
  const std::string he = female ? "She" : "He";
  const std::string his = female ? "her" : "his";
  detail::Date born{static_cast<int>(1 + rng.below(28)), static_cast<int>(1 + rng.below(12)),
                    static_cast<int>(1900 + rng.below(90))};
  const bool infobox_mdy = rng.coin(0.3);
  const std::string born_text = infobox_mdy ? born.mdy() : born.dmy();
  const auto& birthplace = detail::kPlaces[rng.below(std::size(detail::kPlaces))];

  std::vector<Person> parents;
  if (rng.coin(0.85)) parents.push_back(person(false, subject.last));
  if (rng.coin(0.75)) parents.push_back(person(true, rng.coin(0.5) ? subject.last : ""));
  std::vector<Person> spouses;
  std::size_t n_spouses = rng.coin(0.8) ? (rng.coin(0.2) ? 2 : 1) : 0;
  std::vector<int> married;
  for (std::size_t i = 0; i < n_spouses; ++i) {
    spouses.push_back(person(!female, ""));
    married.push_back(born.year + 22 + static_cast<int>(i * 12 + rng.below(10)));
  }
  std::vector<Person> children;
  std::size_t n_children = rng.below(4);
  bool has_troy = false;
  for (std::size_t i = 0; i < n_children; ++i) {
    Person c = person(rng.coin(0.5), subject.last);
    if (rng.coin(0.12) && !has_troy) {
      c.first = "Troy";
      c.female = false;
    }
    if (c.first == "Troy") has_troy = true;
    bool dup = false;
    for (const Person& o : children) dup |= o.first == c.first;
    if (!dup) children.push_back(c);
  }
  std::vector<std::size_t> schools;
  std::size_t n_schools = 1 + rng.below(2);
  while (schools.size() < n_schools) {
    std::size_t s = rng.below(std::size(detail::kInstitutions));
    if (std::find(schools.begin(), schools.end(), s) == schools.end()) schools.push_back(s);
  }
  const std::string occupation = pick(detail::kOccupations);
  const bool children_as_count = !children.empty() && rng.coin(0.2);
  int cite = 1;

  // Infobox.
  std::string box;
  box += "<table class=\"infobox vcard\" style=\"width:22em\"><tbody>\n";
  box += "<tr><th colspan=\"2\" class=\"infobox-above\">" + subject.full() + "</th></tr>\n";
  box += "<tr><th scope=\"row\">Born</th><td><span style=\"display:none\">(<span class=\"bday\">" +
         born.iso() + "</span>)</span>" + born_text + "<br>" + std::string(birthplace.first) +
         ", " + std::string(birthplace.second) + "</td></tr>\n";
  page.record[TagClass::BD].push_back(born_text);
  box += "<tr><th scope=\"row\">Occupation</th><td>" + occupation + "</td></tr>\n";
  if (!spouses.empty()) {
    box += "<tr><th scope=\"row\">" + std::string(spouses.size() > 1 ? "Spouse(s)" : "Spouse") +
           "</th><td>";
    for (std::size_t i = 0; i < spouses.size(); ++i) {
      box += "<div>" + spouses[i].full() + " (m. " + std::to_string(married[i]) + ")</div>";
      page.record[TagClass::SP].push_back(spouses[i].full());
    }
    box += "</td></tr>\n";
  }
  if (!children.empty()) {
    box += "<tr><th scope=\"row\">Children</th><td>";
    if (children_as_count) {
      box += std::to_string(children.size());
    } else {
      for (std::size_t i = 0; i < children.size(); ++i) {
        if (i) box += "<br>";
        box += children[i].full();
        page.record[TagClass::CH].push_back(children[i].full());
      }
    }
    box += "</td></tr>\n";
  }
  if (!parents.empty()) {
    if (parents.size() == 2 && rng.coin(0.4)) {
      box += "<tr><th scope=\"row\">Father</th><td>" + parents[0].full() + "</td></tr>\n";
      box += "<tr><th scope=\"row\">Mother</th><td>" + parents[1].full() + "</td></tr>\n";
    } else {
      box += "<tr><th scope=\"row\">" + std::string(parents.size() > 1 ? "Parent(s)" : "Parent") +
             "</th><td><ul>";
      for (const Person& p : parents) box += "<li>" + p.full() + "</li>";
      box += "</ul></td></tr>\n";
    }
    for (const Person& p : parents) page.record[TagClass::PR].push_back(p.full());
  }
  {
    static constexpr std::string_view kEduKeys[] = {"Alma mater", "Education", "College"};
    box += "<tr><th scope=\"row\">" + pick(kEduKeys) + "</th><td>";
    for (std::size_t i = 0; i < schools.size(); ++i) {
      if (i) box += "<br>";
      box += std::string(detail::kInstitutions[schools[i]].first);
      page.record[TagClass::ED].push_back(std::string(detail::kInstitutions[schools[i]].first));
    }
    box += "<sup class=\"reference\">[" + std::to_string(cite++) + "]</sup></td></tr>\n";
  }
  box += "</tbody></table>\n";

  // Body.
  detail::BodyBuilder b;
  auto maybe_cite = [&](double p) {
    if (rng.coin(p)) b.citation(cite++);
  };

  b.start_paragraph();
  b.text(subject.full() + " (born ");
  b.entity(rng.coin(0.8) ? born_text : (infobox_mdy ? born.dmy() : born.mdy()), TagClass::BD);
  b.text(") is an American " + occupation + ".");
  maybe_cite(0.4);
  b.text(" " + he + " was born in " + std::string(birthplace.first) + ", " +
         std::string(birthplace.second));
  if (parents.size() == 2) {
    b.text(", to ");
    b.entity(parents[0].full(), TagClass::PR);
    b.text(" and ");
    b.entity(parents[1].full(), TagClass::PR);
    b.text(".");
  } else if (parents.size() == 1) {
    b.text(". " + he + " was raised by " + his + (parents[0].female ? " mother, " : " father, "));
    b.entity(parents[0].full(), TagClass::PR);
    b.text(".");
  } else {
    b.text(".");
  }
  maybe_cite(0.5);
  if (!parents.empty() && rng.coin(0.5)) {
    const Person& p = parents[rng.below(parents.size())];
    b.text(" " + std::string(p.female ? "Her" : "His") + " " +
           (p.female ? "mother" : "father") + " worked as a " + pick(detail::kOccupations) + ".");
  }
  b.end_paragraph();

  b.start_paragraph();
  {
    const auto& first = detail::kInstitutions[schools[0]];
    b.text(he + " attended ");
    b.entity(first.first, TagClass::ED);
    b.text(", where " + std::string(female ? "she" : "he") + " studied " + pick(detail::kFields) +
           ".");
    maybe_cite(0.4);
    if (schools.size() > 1) {
      const auto& second = detail::kInstitutions[schools[1]];
      b.text(" " + he + " later earned a degree from ");
      b.entity(second.first, TagClass::ED);
      b.text(".");
    }
    if (rng.coin(0.6)) {
      b.text(" After graduating from ");
      std::string_view short_name = first.second;
      if (short_name.substr(0, 4) == "the ") {
        b.text("the ");
        short_name.remove_prefix(4);
      }
      b.entity(short_name, TagClass::ED);
      b.text(", " + std::string(female ? "she" : "he") + " moved to " +
             std::string(detail::kPlaces[rng.below(std::size(detail::kPlaces))].first) + ".");
    }
    if (rng.coin(0.35)) {
      const Person colleague = person(rng.coin(0.5), "");
      std::size_t other = rng.below(std::size(detail::kInstitutions));
      b.text(" There " + std::string(female ? "she" : "he") + " met " + colleague.full() +
             ", a graduate of " + std::string(detail::kInstitutions[other].first) + ".");
    }
  }
  b.end_paragraph();

  if (!spouses.empty() || !children.empty()) {
    b.start_paragraph();
    for (std::size_t i = 0; i < spouses.size(); ++i) {
      const Person& s = spouses[i];
      const int year = married[i];
      double style = rng.uniform();
      if (style < 0.5) {
        b.text((i == 0 ? "In " : " In ") + std::to_string(year) + ", " +
               std::string(female ? "she" : "he") + " married ");
        b.entity(s.full(), TagClass::SP);
        b.text(".");
      } else if (style < 0.75) {
        b.text(std::string(i == 0 ? "" : " ") + he + " married " + pick(detail::kTitles) + " ");
        b.entity(s.full(), TagClass::SP);
        b.text(" in " + std::to_string(year) + ".");
      } else {
        b.text(std::string(i == 0 ? "" : " ") + "Later that year " + std::string(female ? "she" : "he") + " and ");
        b.entity(s.first, TagClass::SP);
        b.text(" moved to " + std::string(birthplace.first) + ".");
      }
      maybe_cite(0.3);
    }
    if (!children.empty()) {
      b.text(std::string(spouses.empty() ? "" : " ") + he + " has " +
             (children.size() == 1 ? "one child, " : std::to_string(children.size()) + " children: "));
      bool full_names = rng.coin(0.5);
      for (std::size_t i = 0; i < children.size(); ++i) {
        if (i > 0) b.text(i + 1 == children.size() ? " and " : ", ");
        b.entity(full_names ? children[i].full() : children[i].first, TagClass::CH);
      }
      b.text(".");
      maybe_cite(0.3);
    }
    if (has_troy) {
      b.text(" The family lived for many years in Troy, Michigan.");
    }
    b.end_paragraph();
  }

  b.start_paragraph();
  b.text(he + " served as a " + occupation + " from " + std::to_string(born.year + 30) + " to " +
         std::to_string(born.year + 45) + ".");
  maybe_cite(0.5);
  if (rng.coin(0.4)) b.text(" " + he + " received an honorary degree in " +
                            std::to_string(born.year + 50) + ".");
  if (rng.coin(0.2)) {
    b.text(" " + he + " was profiled in the Dr. ");
    b.text(pick(detail::kSurnames) + " Review.");
  }
  b.end_paragraph();

  page.html = "<!DOCTYPE html>\n<html><head><title>" + subject.full() +
              "</title></head>\n<body>\n<h1>" + subject.full() + "</h1>\n" + box +
              b.html() + "</body></html>\n";
  page.body_text = b.body();
  page.gold = detail::project_mentions(page.page_id, page.body_text, b.mentions());
  return page;
}

inline std::vector<SynthPage> synth_pages(std::uint64_t seed, std::size_t count,
                                          std::size_t first_index = 0) {
  std::vector<SynthPage> pages;
  pages.reserve(count);
  for (std::size_t i = 0; i < count; ++i) pages.push_back(synth_page(seed, first_index + i));
  return pages;
}

inline Corpus synth_gold_corpus(std::span<const SynthPage> pages, std::string name = "gold") {
  Corpus c;
  c.name = std::move(name);
  for (const SynthPage& p : pages) c.sentences.insert(c.sentences.end(), p.gold.begin(), p.gold.end());
  return c;
}

}  // namespace piiforge
