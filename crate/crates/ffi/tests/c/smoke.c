#include <math.h>
#include <stdio.h>
#include <string.h>

#include "patchbench.h"

#define CHECK(cond)                                                  \
  do {                                                               \
    if (!(cond)) {                                                   \
      const char *msg = pb_last_error_message();                     \
      fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #cond, \
              msg ? msg : "no message");                             \
      return 1;                                                      \
    }                                                                \
  } while (0)

static const char *SCRIPT =
    "let o = place(\"cycle~ 440\")\n"
    "let d = place(\"ezdac~\")\n"
    "connect(o.out[0], d.in[0])\n"
    "emit()\n";

int main(void) {
  PbGraph *g = NULL;
  CHECK(pb_graph_from_script(SCRIPT, 0, &g) == PB_STATUS_OK);
  CHECK(pb_graph_node_count(g) == 2);
  CHECK(pb_graph_is_well_formed(g));

  char *doc = NULL;
  CHECK(pb_graph_emit_maxpat(g, &doc) == PB_STATUS_OK);
  PbGraph *h = NULL;
  CHECK(pb_graph_parse_maxpat((const uint8_t *)doc, strlen(doc), &h) == PB_STATUS_OK);
  CHECK(pb_graph_node_count(h) == 2);
  pb_string_free(doc);
  pb_graph_free(h);

  PbBuffer *b = NULL;
  CHECK(pb_render(g, 0.5, 8000, 0, &b) == PB_STATUS_OK);
  CHECK(pb_buffer_len(b) == 4000);
  const double *x = pb_buffer_data(b);
  double peak = 0.0;
  for (size_t i = 0; i < pb_buffer_len(b); i++) peak = fmax(peak, fabs(x[i]));
  CHECK(peak > 0.1);
  pb_buffer_free(b);
  pb_graph_free(g);

  double p = 0.0;
  CHECK(pb_pass_at_k(100, 30, 1, &p) == PB_STATUS_OK);
  CHECK(fabs(p - 0.3) < 1e-12);
  CHECK(pb_pass_at_k(3, 4, 1, &p) == PB_STATUS_DOMAIN_ERROR);
  CHECK(pb_last_error_message() != NULL);

  printf("ok %s\n", pb_version());
  return 0;
}
