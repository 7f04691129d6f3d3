#include "rhyme/transcriber.hpp"

#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>
#include <fstream>

#include "rhyme/error.hpp"
#include "rhyme/text.hpp"

extern char** environ;

namespace rhyme {

LexiconBackend::LexiconBackend(std::unordered_map<std::string, std::string> entries)
    : entries_(std::move(entries)) {}

LexiconBackend LexiconBackend::load(const std::filesystem::path& tsv) {
  std::ifstream in(tsv, std::ios::binary);
  if (!in) throw ValidationError("cannot open lexicon " + tsv.string());
  std::unordered_map<std::string, std::string> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw SchemaError(tsv.string() + ":" + std::to_string(line_no) +
                        ": expected word<TAB>ipa");
    }
    entries.insert_or_assign(text::to_lower(line.substr(0, tab)), line.substr(tab + 1));
  }
  return LexiconBackend(std::move(entries));
}

std::string LexiconBackend::ipa(std::string_view input, std::string_view) const {
  std::string out;
  std::vector<std::string> missing;
  for (const auto& word : text::words(input)) {
    auto it = entries_.find(word);
    if (it == entries_.end()) {
      missing.push_back(word);
      continue;
    }
    if (!out.empty()) out += ' ';
    out += it->second;
  }
  if (!missing.empty()) throw UnknownWordError(std::move(missing));
  return out;
}

ProcessBackend::ProcessBackend(std::vector<std::string> argv) : argv_(std::move(argv)) {
  if (argv_.empty()) throw ValidationError("transcriber command is empty");
}

ProcessBackend ProcessBackend::from_command_line(std::string_view command) {
  std::vector<std::string> argv;
  std::string current;
  for (char c : command) {
    if (c == ' ' || c == '\t') {
      if (!current.empty()) argv.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) argv.push_back(std::move(current));
  return ProcessBackend(std::move(argv));
}

std::string ProcessBackend::ipa(std::string_view input, std::string_view language) const {
  std::vector<std::string> args;
  args.reserve(argv_.size() + 1);
  for (const auto& a : argv_) {
    std::string arg = a;
    for (auto pos = arg.find("{lang}"); pos != std::string::npos; pos = arg.find("{lang}")) {
      arg.replace(pos, 6, language);
    }
    args.push_back(std::move(arg));
  }
  args.emplace_back(input);
  std::vector<char*> cargs;
  for (auto& a : args) cargs.push_back(a.data());
  cargs.push_back(nullptr);

  int out_pipe[2];
  int err_pipe[2];
  if (pipe(out_pipe) != 0) throw TranscriptionError("pipe: " + std::string(std::strerror(errno)));
  if (pipe(err_pipe) != 0) {
    close(out_pipe[0]);
    close(out_pipe[1]);
    throw TranscriptionError("pipe: " + std::string(std::strerror(errno)));
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
  posix_spawn_file_actions_adddup2(&actions, err_pipe[1], STDERR_FILENO);
  posix_spawn_file_actions_addclose(&actions, out_pipe[0]);
  posix_spawn_file_actions_addclose(&actions, err_pipe[0]);
  pid_t pid = 0;
  const int rc = posix_spawnp(&pid, cargs[0], &actions, nullptr, cargs.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  close(out_pipe[1]);
  close(err_pipe[1]);
  if (rc != 0) {
    close(out_pipe[0]);
    close(err_pipe[0]);
    throw TranscriptionError("cannot start '" + argv_[0] + "': " + std::strerror(rc));
  }

  std::string out;
  std::string err;
  std::array<pollfd, 2> fds{{{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}}};
  int open_fds = 2;
  std::array<char, 4096> buf{};
  while (open_fds > 0) {
    if (poll(fds.data(), fds.size(), -1) < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (std::size_t k = 0; k < fds.size(); ++k) {
      if (fds[k].fd < 0 || fds[k].revents == 0) continue;
      const ssize_t n = read(fds[k].fd, buf.data(), buf.size());
      if (n > 0) {
        (k == 0 ? out : err).append(buf.data(), static_cast<std::size_t>(n));
      } else {
        close(fds[k].fd);
        fds[k].fd = -1;
        --open_fds;
      }
    }
  }
  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw TranscriptionError("'" + argv_[0] + "' failed (status " +
                             std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1) +
                             ") for '" + std::string(input) + "': " + text::trim(err));
  }
  return text::trim(out);
}

Transcriber::Transcriber(std::shared_ptr<const IpaBackend> backend, const FeatureTable& table)
    : backend_(std::move(backend)), table_(&table) {}

std::shared_ptr<const Transcription> Transcriber::transcribe(std::string_view input,
                                                             std::string_view language) const {
  std::string key;
  key.reserve(language.size() + 1 + input.size());
  key.append(language).push_back('\x1f');
  key.append(input);
  {
    std::shared_lock lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  auto result = std::make_shared<const Transcription>(
      parse_ipa(backend_->ipa(input, language), *table_, std::string(input)));
  std::unique_lock lock(mutex_);
  auto [it, inserted] = cache_.emplace(std::move(key), std::move(result));
  return it->second;
}

std::size_t Transcriber::cache_size() const {
  std::shared_lock lock(mutex_);
  return cache_.size();
}

}  // namespace rhyme
