/* A static packet buffer handing out slices of one arena. */
#include <stddef.h>
#include <stdint.h>

#define PKTBUF_SIZE 128

struct pktsnip {
  _Array_ptr<uint8_t> data : count(size);
  size_t size;
  int users;
};

static uint8_t pktbuf_arena[128];
static size_t pktbuf_used = 0;

_Array_ptr<uint8_t> pktbuf_alloc(size_t size) : count(size) _Checked {
  if (size > 128 - pktbuf_used) {
    return 0;
  }
  _Array_ptr<uint8_t> p : count(size) = pktbuf_arena + pktbuf_used;
  pktbuf_used += size;
  return p;
}

void pktbuf_copy(_Array_ptr<uint8_t> dst : count(n), _Array_ptr<const uint8_t> src : count(n), size_t n) _Checked {
  for (size_t i = 0; i < n; i++) {
    dst[i] = src[i];
  }
}

int pktbuf_put(_Ptr<struct pktsnip> snip, size_t off, uint8_t v) _Checked {
  if (off >= snip->size) {
    return -1;
  }
  snip->data[off] = v;
  return 0;
}

int pktbuf_get(struct pktsnip *snip : itype(_Ptr<struct pktsnip>), size_t off) _Checked {
  if (off >= snip->size) {
    return -1;
  }
  return snip->data[off];
}

void pktbuf_hold(_Ptr<struct pktsnip> snip) _Checked {
  snip->users++;
}

void pktbuf_reset(void) _Checked {
  pktbuf_used = 0;
}
