#include "emergence/emergence.h"

#include <cstdlib>
#include <cstring>
#include <limits>
#include <string>

#include "emergence/cycles.hpp"
#include "emergence/error.hpp"
#include "emergence/forcing.hpp"
#include "emergence/report.hpp"
#include "emergence/schemas.hpp"

struct emc_kernel {
  emergence::Kernel kernel;
};

struct emc_lens {
  emergence::Lens lens;
};

namespace {

thread_local std::string last_error;

emc_status fail(emc_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <class F>
emc_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return EMC_OK;
  } catch (const emergence::Error& e) {
    return fail(static_cast<emc_status>(e.code()), std::string(e.module()) + ": " + e.what());
  } catch (const std::bad_alloc&) {
    return fail(EMC_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(EMC_INTERNAL, e.what());
  }
}

char* copy_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

#define EMC_REQUIRE(cond)                                                  \
  do {                                                                     \
    if (!(cond)) return fail(EMC_INVALID_ARGUMENT, "null argument: " #cond); \
  } while (0)

}  // namespace

extern "C" {

const char* emc_version(void) { return emergence::kToolVersion; }

const char* emc_last_error(void) { return last_error.c_str(); }

const char* emc_status_name(emc_status status) {
  return emergence::error_code_name(static_cast<emergence::ErrorCode>(status)).data();
}

emc_status emc_kernel_create(const double* entries, size_t n, emc_kernel** out) {
  EMC_REQUIRE(entries != nullptr && out != nullptr);
  *out = nullptr;
  return guarded([&] {
    std::vector<std::vector<double>> rows(n, std::vector<double>(n));
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) rows[i][j] = entries[i * n + j];
    *out = new emc_kernel{emergence::validate_kernel(rows).kernel};
  });
}

void emc_kernel_free(emc_kernel* kernel) { delete kernel; }

size_t emc_kernel_dim(const emc_kernel* kernel) { return kernel ? kernel->kernel.dim() : 0; }

emc_status emc_kernel_stationary(const emc_kernel* kernel, double* pi) {
  EMC_REQUIRE(kernel != nullptr && pi != nullptr);
  return guarded([&] {
    const auto result = emergence::stationary(kernel->kernel);
    std::copy(result.pi.weights().begin(), result.pi.weights().end(), pi);
  });
}

emc_status emc_lens_create(const size_t* assignment, size_t n, emc_lens** out) {
  EMC_REQUIRE(assignment != nullptr && out != nullptr);
  *out = nullptr;
  return guarded([&] {
    *out = new emc_lens{emergence::Lens::from_assignment(std::vector<std::size_t>(assignment, assignment + n))};
  });
}

void emc_lens_free(emc_lens* lens) { delete lens; }

size_t emc_lens_block_count(const emc_lens* lens) { return lens ? lens->lens.block_count() : 0; }

emc_status emc_sigma(const emc_kernel* kernel, const double* rho, size_t horizon, double* value,
                     int* infinite) {
  EMC_REQUIRE(kernel != nullptr && rho != nullptr && value != nullptr && infinite != nullptr);
  return guarded([&] {
    const auto& p = kernel->kernel;
    const auto mu = emergence::Dist::make(std::vector<double>(rho, rho + p.dim()), 1e-9);
    const auto r = emergence::sigma_T(p, mu, horizon);
    *infinite = r.infinite ? 1 : 0;
    *value = r.as_double();
  });
}

emc_status emc_affinities(const emc_kernel* kernel, double* out, size_t capacity, size_t* count) {
  EMC_REQUIRE(kernel != nullptr && count != nullptr && (capacity == 0 || out != nullptr));
  return guarded([&] {
    const auto g = emergence::support_graph(kernel->kernel);
    const auto a = emergence::affinities(emergence::one_form(kernel->kernel, g), emergence::cycle_basis(g));
    *count = a.size();
    std::copy_n(a.begin(), std::min(capacity, a.size()), out);
  });
}

emc_status emc_defect(const emc_kernel* kernel, const emc_lens* lens, size_t tau, double* defect,
                      double* retention) {
  EMC_REQUIRE(kernel != nullptr && lens != nullptr && defect != nullptr && retention != nullptr);
  return guarded([&] {
    const auto protos = emergence::PrototypeSet::uniform(lens->lens);
    const auto e = emergence::build_endomap(kernel->kernel, lens->lens, protos, tau);
    *defect = emergence::idempotence_defect_tv(e);
    *retention = emergence::retention_error(kernel->kernel, lens->lens, protos, tau);
  });
}

emc_status emc_forcing(const emc_lens* lens, double* probability, char** dyadic) {
  EMC_REQUIRE(lens != nullptr && probability != nullptr && dyadic != nullptr);
  *dyadic = nullptr;
  return guarded([&] {
    const auto r = emergence::forcing_report(lens->lens);
    *probability = r.p_definable.to_double();
    *dyadic = copy_string(r.p_definable.to_string());
  });
}

emc_status emc_report_run(const char* command, const char* request_json, char** out, int* exit_code) {
  EMC_REQUIRE(command != nullptr && request_json != nullptr && out != nullptr && exit_code != nullptr);
  *out = nullptr;
  return guarded([&] {
    emergence::Json request;
    try {
      request = emergence::Json::parse(request_json);
    } catch (const emergence::Json::parse_error& e) {
      emergence::raise(emergence::ErrorCode::ParseError, "cli_reports", e.what());
    }
    const auto outcome = emergence::run_report(command, request);
    *exit_code = outcome.exit_code;
    *out = copy_string(emergence::render(outcome.report));
  });
}

const char* emc_schema(const char* name) {
  if (name == nullptr) return nullptr;
  return emergence::find_schema(name);
}

const char* emc_schema_names(void) { return emergence::schema_names(); }

void emc_string_free(char* s) { std::free(s); }

}  // extern "C"
