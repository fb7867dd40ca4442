// consilium: batch scoring, ballot tallying, the ISA walkthrough, and the
// session HTTP service.
//
// Exit codes: 0 ok, 1 service startup failure, 2 input error, 3 no Condorcet
// winner under --strict-condorcet.

#include <pthread.h>
#include <signal.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "consilium/consilium.hpp"
#include "consilium/http_api.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitStartup = 1;
constexpr int kExitInput = 2;
constexpr int kExitNoWinner = 3;

#ifndef CONSILIUM_DATASET_DIR
#define CONSILIUM_DATASET_DIR "data"
#endif

void emit(const consilium::Json& doc, bool compact) {
  std::cout << (compact ? doc.dump() : doc.dump(2)) << '\n';
}

int cmd_score(const std::string& matrix_path, const std::string& criteria_path, bool compact) {
  auto matrix = consilium::load_matrix_file(matrix_path);
  auto criteria = consilium::load_criteria_file(criteria_path);
  auto scores = consilium::score_matrix(matrix, criteria);
  emit(consilium::to_json(scores, consilium::derive_ranking(scores, matrix)), compact);
  return kExitOk;
}

int cmd_vote(const std::string& ballots_path, const std::string& method_name, bool strict, bool compact) {
  auto method = consilium::parse_method(method_name);
  if (!method) {
    std::cerr << "error: unknown method '" << method_name << "' (borda|condorcet)\n";
    return kExitInput;
  }
  auto profile = consilium::load_profile(consilium::detail::read_file(ballots_path));
  if (strict && !consilium::condorcet_winner(consilium::pairwise_matrix(profile))) {
    std::cerr << "no Condorcet winner\n";
    return kExitNoWinner;
  }
  emit(consilium::to_json(consilium::vote(profile, *method)), compact);
  return kExitOk;
}

int cmd_demo(const std::string& dataset_dir, bool unanimous, std::optional<std::uint64_t> seed, bool json) {
  namespace fs = std::filesystem;
  auto matrix = consilium::load_matrix_file((fs::path(dataset_dir) / "isa_matrix.csv").string());
  auto criteria = consilium::load_criteria_file((fs::path(dataset_dir) / "isa_criteria.json").string());
  auto outcome = consilium::demo::run(matrix, criteria, {unanimous, seed});
  if (json) emit(consilium::demo::to_json(outcome), true);
  else std::cout << consilium::demo::render(outcome);
  return kExitOk;
}

int cmd_serve(const std::string& host, int port, const std::string& data_dir) {
  namespace fs = std::filesystem;
  try {
    fs::create_directories(fs::path(data_dir) / "sessions");
    auto probe = fs::path(data_dir) / "sessions" / ".write-probe";
    std::ofstream(probe) << "ok";
    if (!fs::exists(probe)) throw std::runtime_error("data dir is not writable");
    fs::remove(probe);
  } catch (const std::exception& e) {
    std::cerr << "error: data dir " << data_dir << ": " << e.what() << '\n';
    return kExitStartup;
  }

  // Signals are taken synchronously by a waiter thread, which stops the server.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::optional<consilium::SessionService> service;
  try {
    consilium::SessionService::Options options;
    options.data_dir = data_dir;
    service.emplace(std::move(options));
  } catch (const std::exception& e) {
    std::cerr << "error: loading sessions from " << data_dir << ": " << e.what() << '\n';
    return kExitStartup;
  }

  httplib::Server server;
  // httplib defaults to SO_REUSEPORT, which would let a second instance share
  // a port already in use instead of failing.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });
  consilium::mount_api(server, *service);

  int bound = port;
  if (port == 0) {
    bound = server.bind_to_any_port(host);
    if (bound < 0) {
      std::cerr << "error: cannot bind " << host << '\n';
      return kExitStartup;
    }
  } else if (!server.bind_to_port(host, port)) {
    std::cerr << "error: cannot bind " << host << ":" << port << " (port in use?)\n";
    return kExitStartup;
  }

  std::thread([&server, signals] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  }).detach();

  std::cout << "listening on " << host << ":" << bound << ", sessions in "
            << (fs::path(data_dir) / "sessions").string() << std::endl;
  return server.listen_after_bind() ? kExitOk : kExitStartup;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Group decision support: multicriteria scoring and Borda/Condorcet voting"};
  app.require_subcommand(1);

  bool json = false;

  auto* score = app.add_subcommand("score", "Weighted-sum scores and ranking of an evaluation matrix");
  std::string matrix_path, criteria_path;
  score->add_option("matrix", matrix_path, "Matrix CSV")->required();
  score->add_option("criteria", criteria_path, "Criteria JSON")->required();
  score->add_flag("--json", json, "Compact single-line JSON");

  auto* vote = app.add_subcommand("vote", "Tally a ballots file");
  std::string ballots_path, method = "condorcet";
  bool strict = false;
  vote->add_option("ballots", ballots_path, "Ballots JSON")->required();
  vote->add_option("--method", method, "borda or condorcet")->capture_default_str();
  vote->add_flag("--strict-condorcet", strict, "Exit 3 when no Condorcet winner exists");
  vote->add_flag("--json", json, "Compact single-line JSON");

  auto* demo = app.add_subcommand("demo", "Run the ISA siting walkthrough end to end");
  std::string dataset_dir = CONSILIUM_DATASET_DIR;
  bool unanimous = false;
  std::optional<std::uint64_t> seed;
  demo->add_option("--dataset-dir", dataset_dir, "Directory holding isa_matrix.csv and isa_criteria.json")
      ->capture_default_str();
  demo->add_flag("--unanimous", unanimous, "All three decision makers use the published weights");
  demo->add_option("--seed", seed, "Jitter the preset weights with this seed");
  demo->add_flag("--json", json, "Emit one JSON document");

  auto* serve = app.add_subcommand("serve", "Run the session HTTP service");
  std::string host = "127.0.0.1";
  int port = 8080;
  const char* env_dir = std::getenv("CONSILIUM_DATA_DIR");
  std::string data_dir = env_dir && *env_dir ? env_dir : ".";
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port, "0 picks a free port")->capture_default_str()->check(CLI::Range(0, 65535));
  serve->add_option("--data-dir", data_dir, "Session storage root (default $CONSILIUM_DATA_DIR or .)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*score) return cmd_score(matrix_path, criteria_path, json);
    if (*vote) return cmd_vote(ballots_path, method, strict, json);
    if (*demo) return cmd_demo(dataset_dir, unanimous, seed, json);
    if (*serve) return cmd_serve(host, port, data_dir);
  } catch (const consilium::Error& e) {
    std::cerr << "error (" << consilium::to_string(e.code()) << "): " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
