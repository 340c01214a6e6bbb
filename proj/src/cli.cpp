#include <algorithm>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "chq/commands.hpp"

namespace chq {

namespace {

BlochAxis parse_axis(const std::string& text) {
  static const std::map<std::string, BlochAxis> named = {
      {"x", {1, 0, 0}}, {"y", {0, 1, 0}}, {"z", {0, 0, 1}}, {"-x", {-1, 0, 0}}, {"-y", {0, -1, 0}}, {"-z", {0, 0, -1}}};
  if (const auto it = named.find(text); it != named.end()) return it->second;
  BlochAxis a{};
  std::stringstream ss(text);
  std::string part;
  std::size_t k = 0;
  while (std::getline(ss, part, ',')) {
    if (k == 3) throw CLI::ValidationError("axis", "expected three components: " + text);
    std::size_t used = 0;
    try {
      a[k] = std::stod(part, &used);
    } catch (const std::exception&) {
      throw CLI::ValidationError("axis", "not a number: " + part);
    }
    if (used != part.size()) throw CLI::ValidationError("axis", "not a number: " + part);
    ++k;
  }
  if (k != 3) throw CLI::ValidationError("axis", "expected x,y,z or one of x, y, z, -x, -y, -z: " + text);
  return a;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Consistent-histories analysis of quantum scenarios", "chq"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string condition = "weak";
  std::string format = "table";
  CommandOptions opts;
  app.add_option("--condition", condition, "Decoherence condition")->check(CLI::IsMember({"weak", "medium"}));
  app.add_option("--tol", opts.epsilon, "Consistency epsilon")->check(CLI::NonNegativeNumber);
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"table", "structured"}));
  app.add_flag("--final-state", opts.final_state, "Use the time-symmetric functional with the scenario's final state");

  std::string scenario;
  std::string second;
  auto* validate = app.add_subcommand("validate", "Load and validate a scenario");
  auto* dm = app.add_subcommand("decoherence-matrix", "Print the decoherence matrix");
  auto* consistency = app.add_subcommand("consistency", "Check the decoherence condition");
  auto* probs = app.add_subcommand("probabilities", "Probabilities of a consistent family");
  auto* hpo = app.add_subcommand("hpo", "History propositions and orthoalgebra checks");
  for (auto* sub : {validate, dm, consistency, probs, hpo}) {
    sub->add_option("scenario", scenario, "Scenario file")->required();
  }
  auto* compat = app.add_subcommand("compat", "Compare two families");
  compat->add_option("first", scenario, "First scenario file")->required();
  compat->add_option("second", second, "Second scenario file")->required();
  auto* psg = app.add_subcommand("psg-validate", "Check a composition table");
  psg->add_option("table", scenario, "Composition table file")->required();

  auto* example = app.add_subcommand("example", "Built-in examples");
  example->require_subcommand(1);
  auto* spin = example->add_subcommand("spin-half", "Spin-1/2 sequence analysis");
  std::string n0 = "z";
  std::string n = "z";
  std::string nprime = "z";
  spin->add_option("--n0", n0, "Preparation axis (x,y,z or a named axis)");
  spin->add_option("--n", n, "Axis measured at the later time");
  spin->add_option("--nprime", nprime, "Axis measured at the earlier time");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_status::ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_status::ok;
  } catch (const CLI::ParseError& e) {
    err << "error (usage): " << e.what() << '\n';
    return exit_status::invalid;
  }

  opts.condition = condition == "medium" ? Condition::medium : Condition::weak;
  opts.format = format == "structured" ? OutputFormat::structured : OutputFormat::table;

  CommandResult result;
  if (*validate) {
    result = cmd_validate(scenario, opts);
  } else if (*dm) {
    result = cmd_decoherence_matrix(scenario, opts);
  } else if (*consistency) {
    result = cmd_consistency(scenario, opts);
  } else if (*probs) {
    result = cmd_probabilities(scenario, opts);
  } else if (*hpo) {
    result = cmd_hpo(scenario, opts);
  } else if (*compat) {
    result = cmd_compat(scenario, second, opts);
  } else if (*psg) {
    result = cmd_psg_validate(scenario, opts);
  } else {
    try {
      result = cmd_example_spin_half(parse_axis(n0), parse_axis(n), parse_axis(nprime), opts);
    } catch (const CLI::ValidationError& e) {
      err << "error (usage): " << e.what() << '\n';
      return exit_status::invalid;
    }
  }
  out << result.out;
  err << result.err;
  return result.exit_code;
}

}  // namespace chq
