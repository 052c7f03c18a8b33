#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "apc.h"

#define CHECK(cond)                                                   \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #cond,  \
              apc_last_error_message());                              \
      return 1;                                                       \
    }                                                                 \
  } while (0)

int main(void) {
  const char *text =
      "APC 1\n"
      "n 2\n"
      "costs\n"
      "1 10\n"
      "10 1\n"
      "conflicts 1\n"
      "0 0 1 1\n";
  ApcInstance *inst = NULL;
  CHECK(apc_instance_parse(text, &inst) == APC_ERROR_CODE_OK);
  CHECK(apc_instance_n(inst) == 2);

  ApcSolution *sol = NULL;
  CHECK(apc_solve_exact(inst, 10.0, 0, NULL, &sol) == APC_ERROR_CODE_OK);
  CHECK(apc_solution_status(sol) == APC_SOLVE_STATUS_OPTIMAL);
  int64_t value = 0;
  CHECK(apc_solution_value(sol, &value) && value == 20);
  size_t a[2];
  CHECK(apc_solution_assignment(sol, a, 2) == 2 && a[0] == 1 && a[1] == 0);
  apc_solution_free(sol);

  char *lp = NULL;
  CHECK(apc_instance_export_lp(inst, &lp) == APC_ERROR_CODE_OK);
  CHECK(strstr(lp, "Binary") != NULL);
  apc_string_free(lp);

  ApcInstance *bad = NULL;
  CHECK(apc_instance_parse("APC 2\n", &bad) == APC_ERROR_CODE_PARSE);
  CHECK(bad == NULL);
  CHECK(strlen(apc_last_error_message()) > 0);

  apc_instance_free(inst);
  printf("ok\n");
  return 0;
}
