/* Command-line option parsing over null-terminated arguments. */
#include <stddef.h>

int opt_is_option(_Nt_array_ptr<const char> arg) _Checked {
  return arg[0] == '-';
}

int opt_parse_num(_Nt_array_ptr<const char> arg : count(len), size_t len, _Ptr<int> value) _Checked {
  int v = 0;
  if (len < 3 || arg[0] != '-') {
    return -1;
  }
  for (size_t i = 2; i < len; i++) {
    char c = arg[i];
    if (c < '0' || c > '9') {
      return -1;
    }
    v = v * 10 + (c - '0');
  }
  *value = v;
  return arg[1];
}

size_t opt_copy_name(_Array_ptr<char> dst : count(cap), size_t cap,
                     _Nt_array_ptr<const char> src : count(len), size_t len) _Checked {
  size_t n = 0;
  while (n + 1 < cap && n < len && src[n] != '=') {
    dst[n] = src[n];
    n++;
  }
  if (cap > 0) {
    dst[n] = 0;
  }
  return n;
}
