#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace blockpath {

struct QuizItem {
  std::string question;
  std::vector<std::string> options;  // 2 to 6
  std::size_t correct = 0;
  std::string explanation;
};

struct Book {
  std::string id;
  std::string title;
  std::optional<double> threshold;  // unset: 1.0 up to 3 items, 0.75 beyond
  std::vector<std::string> pages;
  std::vector<QuizItem> quiz;

  double pass_threshold() const;
  // ConfigError on a violated invariant.
  void validate() const;
};

struct QuizResult {
  double score = 1.0;
  std::vector<bool> correct;
  bool gate_passed = true;
};

// ArgumentError when the answer count differs from the quiz length or an
// answer is not an option index.
QuizResult grade_quiz(const Book& book, const std::vector<std::size_t>& answers);

// Book document:
//   ---
//   id: bfs
//   title: Breadth-first search
//   threshold: 0.75        (optional)
//   ---
//   === page
//   free text ...
//   === quiz
//   question: ...
//   option: ...
//   option*: ...            (the correct one)
//   explanation: ...
Book parse_book(std::string_view text);
std::string save_book(const Book& book);

class BookLibrary {
 public:
  BookLibrary() = default;
  // Loads every *.book file in the directory.
  static BookLibrary load_dir(const std::string& dir);

  void add(Book book);
  bool contains(const std::string& id) const { return books_.count(id) > 0; }
  const Book& get(const std::string& id) const;  // NotFoundError
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, Book> books_;
};

// Which quizzes each student has passed. A pass is permanent; later failed
// retries do not close the gate again. File-backed when a directory is given.
class GateStore {
 public:
  explicit GateStore(std::optional<std::string> dir = std::nullopt);

  void record(const std::string& student, const std::string& book_id, const QuizResult& result);
  bool passed(const std::string& student, const std::string& book_id) const;
  std::set<std::string> passed_books(const std::string& student) const;

 private:
  std::set<std::string>& load(const std::string& student) const;
  std::string path_for(const std::string& student) const;

  std::optional<std::string> dir_;
  mutable std::mutex mu_;
  mutable std::map<std::string, std::set<std::string>> cache_;
};

// Student ids become file names; ArgumentError unless [A-Za-z0-9_-]+.
void validate_student_id(const std::string& id);

}  // namespace blockpath
