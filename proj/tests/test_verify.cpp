#include "doctest.h"
#include "tgfuse/verify.hpp"

#include <sstream>

using namespace tgfuse;

TEST_CASE("property checks pass on small instance counts") {
  auto t1 = verify::check_decay_identity(25, 500);
  CHECK(t1.pass);
  CHECK(t1.max_err <= 1e-9);

  auto grad = verify::check_gradients(2, 600);
  CHECK(grad.pass);
  CHECK(grad.max_err <= 1e-4);

  auto collapse = verify::check_delta0_collapse(10, 700);
  CHECK(collapse.pass);
  CHECK(collapse.max_err <= 1e-12);
}

TEST_CASE("an injected fault flips the identity check and names a seed") {
  auto broken = verify::check_decay_identity(5, 800, /*fault_injection=*/1e-3);
  CHECK_FALSE(broken.pass);
  CHECK(broken.detail.find("seed") != std::string::npos);
}

TEST_CASE("report prints one line per check and aggregates the verdict") {
  std::vector<verify::CheckResult> results{{"alpha", true, 1e-12, "", 0.1},
                                           {"beta", false, 0.5, "seed 3", 0.2}};
  std::ostringstream os;
  CHECK_FALSE(verify::print_report(results, os));
  const std::string text = os.str();
  CHECK(text.find("[PASS] alpha") != std::string::npos);
  CHECK(text.find("[FAIL] beta") != std::string::npos);
  CHECK(text.find("seed 3") != std::string::npos);
}
