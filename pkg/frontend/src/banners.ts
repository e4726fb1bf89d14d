/** Dismissible error banners for failed fetches and rejected uploads. */

export function showBanner(container: HTMLElement, message: string): HTMLElement {
  const banner = document.createElement("div");
  banner.className = "banner";
  banner.setAttribute("role", "alert");

  const text = document.createElement("span");
  text.textContent = message;
  banner.appendChild(text);

  const dismiss = document.createElement("button");
  dismiss.textContent = "×";
  dismiss.setAttribute("aria-label", "dismiss");
  dismiss.addEventListener("click", () => banner.remove());
  banner.appendChild(dismiss);

  container.appendChild(banner);
  return banner;
}
